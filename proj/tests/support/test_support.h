// Copyright 2026 The PBCT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Shared fixtures and the bridge from library types to oracle inputs.

#ifndef PBCT_TESTS_TEST_SUPPORT_H_
#define PBCT_TESTS_TEST_SUPPORT_H_

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.h"
#include "pbct/autodiff.h"
#include "pbct/config.h"
#include "pbct/corpus.h"
#include "pbct/trainer.h"
#include "pbct/transformer.h"
#include "pbct/utf8.h"

namespace pbct::testing {

inline oracle::Mat ToMat(const ad::Matrix& m) {
  oracle::Mat out(m.rows(), oracle::Vec(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

inline oracle::Vec ToVec(const ad::Matrix& m) { return oracle::Vec(m.data(), m.data() + m.size()); }

inline oracle::ToyWeights ToOracleWeights(const Transformer& t) {
  oracle::ToyWeights w;
  w.heads = t.config().heads;
  w.eps = t.config().layer_norm_eps;
  w.word = ToMat(t.word_embeddings().value);
  w.position = ToMat(t.position_embeddings().value);
  w.type = ToMat(t.type_embeddings().value);
  w.emb_g = ToVec(t.embedding_norm_gain().value);
  w.emb_b = ToVec(t.embedding_norm_bias().value);
  for (int i = 0; i < t.config().layers; ++i) {
    const Transformer::Layer& l = t.layer(i);
    oracle::ToyLayer o;
    o.wq = ToMat(l.wq->value);
    o.wk = ToMat(l.wk->value);
    o.wv = ToMat(l.wv->value);
    o.wo = ToMat(l.wo->value);
    o.bq = ToVec(l.bq->value);
    o.bk = ToVec(l.bk->value);
    o.bv = ToVec(l.bv->value);
    o.bo = ToVec(l.bo->value);
    o.ln1_g = ToVec(l.ln1_g->value);
    o.ln1_b = ToVec(l.ln1_b->value);
    o.w1 = ToMat(l.w1->value);
    o.b1 = ToVec(l.b1->value);
    o.w2 = ToMat(l.w2->value);
    o.b2 = ToVec(l.b2->value);
    o.ln2_g = ToVec(l.ln2_g->value);
    o.ln2_b = ToVec(l.ln2_b->value);
    w.layers.push_back(std::move(o));
  }
  w.head_w = ToMat(t.head_dense().value);
  w.head_b = ToVec(t.head_dense_bias().value);
  w.head_g = ToVec(t.head_norm_gain().value);
  w.head_beta = ToVec(t.head_norm_bias().value);
  w.out_bias = ToVec(t.output_bias().value);
  return w;
}

// Strictly positive distribution over k outcomes.
inline std::vector<double> RandomDistribution(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> p(k);
  double s = 0.0;
  for (double& v : p) s += (v = u(rng));
  for (double& v : p) v /= s;
  return p;
}

// Symmetric cost from random points on a line plus a random offset per
// pair, kept metric by taking shortest paths.
inline oracle::Mat RandomMetric(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> u(0.1, 2.0);
  oracle::Mat c(k, oracle::Vec(k, 0.0));
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) c[i][j] = c[j][i] = u(rng);
  for (int m = 0; m < k; ++m)
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) c[i][j] = std::min(c[i][j], c[i][m] + c[m][j]);
  return c;
}

inline ad::Matrix ToMatrix(const oracle::Mat& m) {
  ad::Matrix out(m.size(), m.empty() ? 0 : m[0].size());
  for (size_t i = 0; i < m.size(); ++i)
    for (size_t j = 0; j < m[i].size(); ++j) out(i, j) = m[i][j];
  return out;
}

inline ad::Var Row(const std::vector<double>& v) { return ad::RowVector(v); }

// Seen mention with the trigger anchored at the first whole-word match.
inline EventMention Mention(std::string id, std::string text, const std::string& trigger,
                            std::optional<std::string> label) {
  EventMention m;
  m.id = std::move(id);
  m.text = std::move(text);
  if (!trigger.empty()) {
    size_t byte = utf8::FindWord(m.text, trigger);
    size_t start = utf8::CodepointCount(std::string_view(m.text).substr(0, byte));
    m.trigger = TriggerSpan{start, start + utf8::CodepointCount(trigger)};
  }
  m.label = std::move(label);
  return m;
}

// Fresh directory under the system temp root.
inline std::filesystem::path TempDir(const std::string& name) {
  std::filesystem::path p = std::filesystem::temp_directory_path() / ("pbct_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Toy preset scaled down for unit tests.
inline RunConfig SmallConfig(int steps = 6) {
  RunConfig c = Preset("toy");
  c.max_steps = steps;
  c.batch_size = 4;
  c.eval_interval = 0;
  c.patience = 0;
  return c;
}

}  // namespace pbct::testing

#endif  // PBCT_TESTS_TEST_SUPPORT_H_

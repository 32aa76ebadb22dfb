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

#include "pbct/heads.h"

#include <cmath>

#include "pbct/status.h"

namespace pbct {

TriggerDistribution ComputeTriggerDistribution(const ad::Var& mask_logits,
                                               const PromptEncoding& pe) {
  if (pe.mention_first < 0 || pe.mention_last < pe.mention_first) {
    throw ConfigError("trigger distribution over an empty mention range");
  }
  std::vector<int> ids(pe.token_ids.begin() + pe.mention_first,
                       pe.token_ids.begin() + pe.mention_last + 1);
  TriggerDistribution out;
  out.log_probs = ad::LogSoftmaxRows(ad::GatherCols(mask_logits, ids));
  const ad::Matrix& lp = out.log_probs->value();
  out.probs.resize(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) {
    out.probs[i] = std::exp(lp(0, static_cast<Eigen::Index>(i)));
    if (out.probs[i] > out.probs[static_cast<size_t>(out.best_offset)]) {
      out.best_offset = static_cast<int>(i);
    }
  }
  out.best_position = pe.mention_first + out.best_offset;
  out.best_token_text = pe.token_words.at(static_cast<size_t>(out.best_offset));
  out.best_word_span = pe.token_word_spans.at(static_cast<size_t>(out.best_offset));
  return out;
}

// Zero parameters make the gate start at (0.5, 0.5).
Sentinel::Sentinel(int hidden)
    : weight_("sentinel.weight", ad::Matrix::Zero(2 * hidden, 2)),
      bias_("sentinel.bias", ad::Matrix::Zero(1, 2)) {}

ad::Var SentinelWeights(const Sentinel& sentinel, const ad::Var& context, const ad::Var& mask) {
  if (!context->value().allFinite() || !mask->value().allFinite()) {
    throw NumericError("sentinel input is not finite");
  }
  if (context->cols() * 2 != sentinel.weight().value.rows() || mask->cols() != context->cols()) {
    throw ConfigError("sentinel input has the wrong dimension");
  }
  ad::Var joint = ad::ConcatCols({context, mask});
  return ad::SoftmaxRows(ad::AddRowBroadcast(ad::MatMul(joint, ad::Leaf(sentinel.weight())),
                                             ad::Leaf(sentinel.bias())));
}

ad::Var EventVector(const ad::Var& g, const ad::Var& context, const ad::Var& mask) {
  return ad::Add(ad::MulScalar(context, ad::Element(g, 0, 0)),
                 ad::MulScalar(mask, ad::Element(g, 0, 1)));
}

Classification Classify(const ad::Var& x, const ad::Var& prototypes,
                        std::optional<std::span<const int>> restrict, DistanceKind distance) {
  const int m = static_cast<int>(prototypes->rows());
  Classification out;
  if (restrict) {
    if (restrict->empty()) throw ConfigError("empty classification support");
    for (int j : * restrict) {
      if (j < 0 || j >= m) throw ConfigError("support index out of range");
    }
    out.support.assign(restrict->begin(), restrict->end());
  } else {
    out.support.resize(m);
    for (int j = 0; j < m; ++j) out.support[j] = j;
  }
  ad::Var rows = restrict ? ad::GatherRows(prototypes, out.support) : prototypes;
  ad::Var d = distance == DistanceKind::kEuclidean ? ad::EuclideanDistances(x, rows)
                                                   : ad::SquaredDistances(x, rows);
  out.logits = ad::Neg(d);
  out.probs = ad::SoftmaxRows(out.logits);
  out.full_probs.assign(m, 0.0);
  const ad::Matrix& dv = d->value();
  int best = 0;
  for (size_t k = 0; k < out.support.size(); ++k) {
    out.full_probs[out.support[k]] = out.probs->value()(0, static_cast<Eigen::Index>(k));
    const double dk = dv(0, static_cast<Eigen::Index>(k));
    const double db = dv(0, best);
    if (dk < db || (dk == db && out.support[k] < out.support[best])) {
      best = static_cast<int>(k);
    }
  }
  out.prediction = out.support[best];
  return out;
}

}  // namespace pbct

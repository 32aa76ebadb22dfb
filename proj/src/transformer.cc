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

#include "pbct/transformer.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"
#include "pbct/status.h"

namespace pbct {
namespace {

using json = nlohmann::json;
using ad::Matrix;

Matrix Gaussian(int rows, int cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

std::string LayerPrefix(int i) { return "encoder.layer." + std::to_string(i) + "."; }

double HalfToDouble(uint16_t h) {
  uint32_t sign = (h >> 15) & 1;
  uint32_t exp = (h >> 10) & 0x1F;
  uint32_t frac = h & 0x3FF;
  double v;
  if (exp == 0) {
    v = std::ldexp(static_cast<double>(frac), -24);
  } else if (exp == 31) {
    v = frac ? std::nan("") : INFINITY;
  } else {
    v = std::ldexp(static_cast<double>(frac | 0x400), static_cast<int>(exp) - 25);
  }
  return sign ? -v : v;
}

struct RawTensor {
  std::string dtype;
  std::vector<int64_t> shape;
  const char* data = nullptr;
  size_t bytes = 0;
};

Matrix ToMatrix(const RawTensor& t, const std::string& name) {
  int64_t rows = t.shape.size() == 2 ? t.shape[0] : 1;
  int64_t cols = t.shape.size() == 2 ? t.shape[1] : t.shape.empty() ? 1 : t.shape[0];
  if (t.shape.size() > 2) throw FormatError(name + ": rank > 2");
  Matrix m(rows, cols);
  const int64_t n = rows * cols;
  auto expect = [&](size_t width) {
    if (t.bytes != static_cast<size_t>(n) * width) {
      throw FormatError(name + ": byte size does not match shape");
    }
  };
  if (t.dtype == "F32") {
    expect(4);
    for (int64_t i = 0; i < n; ++i) {
      float f;
      std::memcpy(&f, t.data + 4 * i, 4);
      m.data()[i] = f;
    }
  } else if (t.dtype == "F64") {
    expect(8);
    std::memcpy(m.data(), t.data, 8 * n);
  } else if (t.dtype == "F16" || t.dtype == "BF16") {
    expect(2);
    for (int64_t i = 0; i < n; ++i) {
      uint16_t h;
      std::memcpy(&h, t.data + 2 * i, 2);
      if (t.dtype == "F16") {
        m.data()[i] = HalfToDouble(h);
      } else {
        uint32_t bits = static_cast<uint32_t>(h) << 16;
        float f;
        std::memcpy(&f, &bits, 4);
        m.data()[i] = f;
      }
    }
  } else {
    throw FormatError(name + ": unsupported dtype " + t.dtype);
  }
  return m;
}

// Maps internal parameter names to checkpoint tensor names. Linear weights
// are stored output-major in the file.
struct ExternalName {
  std::string name;
  bool transpose;
  bool vector;
};

ExternalName External(const std::string& internal) {
  bool linear = internal.find("dense.weight") != std::string::npos ||
                internal.find("query.weight") != std::string::npos ||
                internal.find("key.weight") != std::string::npos ||
                internal.find("value.weight") != std::string::npos;
  bool vector =
      internal.find("bias") != std::string::npos || internal.find("LayerNorm") != std::string::npos;
  if (internal == "predictions.bias") return {"cls.predictions.bias", false, true};
  if (internal.rfind("predictions.", 0) == 0) {
    return {"cls." + internal, linear, vector};
  }
  return {"bert." + internal, linear, vector};
}

}  // namespace

ad::Parameter* Transformer::Add(std::string name, Matrix value) {
  params_.push_back(std::make_unique<ad::Parameter>(std::move(name), std::move(value)));
  return params_.back().get();
}

Transformer::Transformer(const TransformerConfig& config, uint64_t seed, double init_std)
    : config_(config) {
  if (config.vocab_size <= 0 || config.hidden <= 0 || config.layers <= 0 || config.heads <= 0 ||
      config.hidden % config.heads != 0) {
    throw ConfigError("transformer: invalid configuration");
  }
  std::mt19937_64 rng(seed);
  const int h = config.hidden;
  const int f = config.intermediate;
  auto ones = [](int n) { return Matrix::Ones(1, n).eval(); };
  auto zeros = [](int n) { return Matrix::Zero(1, n).eval(); };

  word_emb_ =
      Add("embeddings.word_embeddings.weight", Gaussian(config.vocab_size, h, init_std, rng));
  pos_emb_ = Add("embeddings.position_embeddings.weight",
                 Gaussian(config.max_positions, h, init_std, rng));
  type_emb_ =
      Add("embeddings.token_type_embeddings.weight", Gaussian(config.type_vocab, h, init_std, rng));
  emb_ln_g_ = Add("embeddings.LayerNorm.weight", ones(h));
  emb_ln_b_ = Add("embeddings.LayerNorm.bias", zeros(h));
  for (int i = 0; i < config.layers; ++i) {
    std::string p = LayerPrefix(i);
    Layer l;
    l.wq = Add(p + "attention.self.query.weight", Gaussian(h, h, init_std, rng));
    l.bq = Add(p + "attention.self.query.bias", zeros(h));
    l.wk = Add(p + "attention.self.key.weight", Gaussian(h, h, init_std, rng));
    l.bk = Add(p + "attention.self.key.bias", zeros(h));
    l.wv = Add(p + "attention.self.value.weight", Gaussian(h, h, init_std, rng));
    l.bv = Add(p + "attention.self.value.bias", zeros(h));
    l.wo = Add(p + "attention.output.dense.weight", Gaussian(h, h, init_std, rng));
    l.bo = Add(p + "attention.output.dense.bias", zeros(h));
    l.ln1_g = Add(p + "attention.output.LayerNorm.weight", ones(h));
    l.ln1_b = Add(p + "attention.output.LayerNorm.bias", zeros(h));
    l.w1 = Add(p + "intermediate.dense.weight", Gaussian(h, f, init_std, rng));
    l.b1 = Add(p + "intermediate.dense.bias", zeros(f));
    l.w2 = Add(p + "output.dense.weight", Gaussian(f, h, init_std, rng));
    l.b2 = Add(p + "output.dense.bias", zeros(h));
    l.ln2_g = Add(p + "output.LayerNorm.weight", ones(h));
    l.ln2_b = Add(p + "output.LayerNorm.bias", zeros(h));
    layers_.push_back(l);
  }
  head_w_ = Add("predictions.transform.dense.weight", Gaussian(h, h, init_std, rng));
  head_b_ = Add("predictions.transform.dense.bias", zeros(h));
  head_ln_g_ = Add("predictions.transform.LayerNorm.weight", ones(h));
  head_ln_b_ = Add("predictions.transform.LayerNorm.bias", zeros(h));
  out_bias_ = Add("predictions.bias", zeros(config.vocab_size));
}

ad::Var Transformer::Encode(std::span<const int> ids) const {
  const int n = static_cast<int>(ids.size());
  if (n == 0) throw ConfigError("transformer: empty input");
  if (n > config_.max_positions) {
    throw ConfigError("transformer: input of " + std::to_string(n) + " tokens exceeds " +
                      std::to_string(config_.max_positions));
  }
  const double eps = config_.layer_norm_eps;
  std::vector<int> positions(n);
  for (int i = 0; i < n; ++i) positions[i] = i;
  std::vector<int> types(n, 0);

  ad::Var x = ad::Add(ad::GatherRows(ad::Leaf(*word_emb_), ids),
                      ad::GatherRows(ad::Leaf(*pos_emb_), positions));
  x = ad::Add(x, ad::GatherRows(ad::Leaf(*type_emb_), types));
  x = ad::LayerNorm(x, ad::Leaf(*emb_ln_g_), ad::Leaf(*emb_ln_b_), eps);

  const int heads = config_.heads;
  const int dh = config_.hidden / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (const Layer& l : layers_) {
    ad::Var q = ad::AddRowBroadcast(ad::MatMul(x, ad::Leaf(*l.wq)), ad::Leaf(*l.bq));
    ad::Var k = ad::AddRowBroadcast(ad::MatMul(x, ad::Leaf(*l.wk)), ad::Leaf(*l.bk));
    ad::Var v = ad::AddRowBroadcast(ad::MatMul(x, ad::Leaf(*l.wv)), ad::Leaf(*l.bv));
    std::vector<ad::Var> contexts;
    contexts.reserve(heads);
    for (int hd = 0; hd < heads; ++hd) {
      ad::Var qh = ad::Cols(q, hd * dh, dh);
      ad::Var kh = ad::Cols(k, hd * dh, dh);
      ad::Var vh = ad::Cols(v, hd * dh, dh);
      ad::Var attn = ad::SoftmaxRows(ad::Scale(ad::MatMulBT(qh, kh), scale));
      contexts.push_back(ad::MatMul(attn, vh));
    }
    ad::Var ctx = heads == 1 ? contexts[0] : ad::ConcatCols(contexts);
    ad::Var attn_out = ad::AddRowBroadcast(ad::MatMul(ctx, ad::Leaf(*l.wo)), ad::Leaf(*l.bo));
    x = ad::LayerNorm(ad::Add(x, attn_out), ad::Leaf(*l.ln1_g), ad::Leaf(*l.ln1_b), eps);
    ad::Var inner = ad::Gelu(ad::AddRowBroadcast(ad::MatMul(x, ad::Leaf(*l.w1)), ad::Leaf(*l.b1)));
    ad::Var ffn = ad::AddRowBroadcast(ad::MatMul(inner, ad::Leaf(*l.w2)), ad::Leaf(*l.b2));
    x = ad::LayerNorm(ad::Add(x, ffn), ad::Leaf(*l.ln2_g), ad::Leaf(*l.ln2_b), eps);
  }
  return x;
}

ad::Var Transformer::MaskLogits(const ad::Var& hidden_row) const {
  ad::Var t =
      ad::Gelu(ad::AddRowBroadcast(ad::MatMul(hidden_row, ad::Leaf(*head_w_)), ad::Leaf(*head_b_)));
  t = ad::LayerNorm(t, ad::Leaf(*head_ln_g_), ad::Leaf(*head_ln_b_), config_.layer_norm_eps);
  return ad::AddRowBroadcast(ad::MatMulBT(t, ad::Leaf(*word_emb_)), ad::Leaf(*out_bias_));
}

std::vector<ad::Parameter*> Transformer::Parameters() const {
  std::vector<ad::Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

ad::Parameter* Transformer::Find(const std::string& name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

std::unique_ptr<Transformer> LoadSafetensorsBert(const std::string& path, int heads,
                                                 double layer_norm_eps) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open encoder weights " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string blob = ss.str();
  if (blob.size() < 8) throw FormatError(path + ": truncated safetensors file");
  uint64_t header_len = 0;
  std::memcpy(&header_len, blob.data(), 8);
  if (8 + header_len > blob.size()) {
    throw FormatError(path + ": truncated safetensors header");
  }
  json header;
  try {
    header = json::parse(blob.substr(8, header_len));
  } catch (const json::exception& e) {
    throw FormatError(path + ": bad safetensors header: " + e.what());
  }
  const char* base = blob.data() + 8 + header_len;
  const size_t payload = blob.size() - 8 - header_len;
  std::map<std::string, RawTensor> tensors;
  for (const auto& [name, meta] : header.items()) {
    if (name == "__metadata__") continue;
    RawTensor t;
    t.dtype = meta.at("dtype").get<std::string>();
    t.shape = meta.at("shape").get<std::vector<int64_t>>();
    auto offsets = meta.at("data_offsets").get<std::vector<size_t>>();
    if (offsets.size() != 2 || offsets[1] < offsets[0] || offsets[1] > payload) {
      throw FormatError(path + ": bad offsets for " + name);
    }
    t.data = base + offsets[0];
    t.bytes = offsets[1] - offsets[0];
    // Older checkpoints name LayerNorm parameters gamma/beta.
    std::string key = name;
    for (auto [from, to] : {std::pair{"LayerNorm.gamma", "LayerNorm.weight"},
                            std::pair{"LayerNorm.beta", "LayerNorm.bias"}}) {
      auto at = key.find(from);
      if (at != std::string::npos) key.replace(at, std::strlen(from), to);
    }
    tensors[key] = t;
  }
  auto get = [&](const std::string& name) -> const RawTensor& {
    auto it = tensors.find(name);
    if (it == tensors.end()) it = tensors.find(name.substr(name.find('.') + 1));
    if (it == tensors.end()) throw FormatError(path + ": missing tensor " + name);
    return it->second;
  };

  TransformerConfig cfg;
  const RawTensor& words = get("bert.embeddings.word_embeddings.weight");
  const RawTensor& pos = get("bert.embeddings.position_embeddings.weight");
  const RawTensor& types = get("bert.embeddings.token_type_embeddings.weight");
  if (words.shape.size() != 2) throw FormatError(path + ": bad embedding rank");
  cfg.vocab_size = static_cast<int>(words.shape[0]);
  cfg.hidden = static_cast<int>(words.shape[1]);
  cfg.max_positions = static_cast<int>(pos.shape.at(0));
  cfg.type_vocab = static_cast<int>(types.shape.at(0));
  cfg.layers = 0;
  while (tensors.count("bert.encoder.layer." + std::to_string(cfg.layers) +
                       ".attention.self.query.weight") ||
         tensors.count("encoder.layer." + std::to_string(cfg.layers) +
                       ".attention.self.query.weight")) {
    ++cfg.layers;
  }
  if (cfg.layers == 0) throw FormatError(path + ": no encoder layers");
  cfg.intermediate =
      static_cast<int>(get("bert.encoder.layer.0.intermediate.dense.weight").shape.at(0));
  cfg.heads = heads > 0 ? heads : std::max(1, cfg.hidden / 64);
  cfg.layer_norm_eps = layer_norm_eps;

  auto model = std::make_unique<Transformer>(cfg, 0, 0.0);
  for (ad::Parameter* p : model->Parameters()) {
    ExternalName ext = External(p->name);
    Matrix m = ToMatrix(get(ext.name), ext.name);
    if (ext.vector) m.resize(1, m.size());
    if (ext.transpose) m = m.transpose().eval();
    if (m.rows() != p->value.rows() || m.cols() != p->value.cols()) {
      throw FormatError(path + ": shape mismatch for " + ext.name);
    }
    p->value = std::move(m);
    p->ZeroGrad();
  }
  return model;
}

void SaveSafetensorsBert(const Transformer& model, const std::string& path) {
  json header = json::object();
  std::string payload;
  for (const ad::Parameter* p : model.Parameters()) {
    ExternalName ext = External(p->name);
    Matrix m = ext.transpose ? Matrix(p->value.transpose()) : p->value;
    std::vector<int64_t> shape;
    if (ext.vector) {
      shape = {static_cast<int64_t>(m.size())};
    } else {
      shape = {static_cast<int64_t>(m.rows()), static_cast<int64_t>(m.cols())};
    }
    size_t begin = payload.size();
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      float f = static_cast<float>(m.data()[i]);
      payload.append(reinterpret_cast<const char*>(&f), 4);
    }
    header[ext.name] = {
        {"dtype", "F32"}, {"shape", shape}, {"data_offsets", {begin, payload.size()}}};
  }
  std::string h = header.dump();
  uint64_t len = h.size();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path);
  os.write(reinterpret_cast<const char*>(&len), 8);
  os << h << payload;
}

}  // namespace pbct

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

#include "pbct/checkpoint.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pbct/status.h"

namespace pbct {
namespace {

using json = nlohmann::json;

constexpr char kMagic[8] = {'P', 'B', 'C', 'T', 'C', 'K', 'P', 'T'};

uint64_t Fnv1a(const std::string& bytes) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

template <typename T>
void Put(std::string& out, T v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

void PutMatrix(std::string& out, const ad::Matrix& m) {
  out.append(reinterpret_cast<const char*>(m.data()),
             static_cast<size_t>(m.size()) * sizeof(double));
}

json ShapeOf(const ad::Matrix& m) { return {m.rows(), m.cols()}; }

class Reader {
 public:
  Reader(const std::string& data, size_t pos, size_t end) : data_(data), pos_(pos), end_(end) {}
  void Matrix(ad::Matrix& m, Eigen::Index rows, Eigen::Index cols) {
    size_t bytes = static_cast<size_t>(rows * cols) * sizeof(double);
    if (pos_ + bytes > end_) throw FormatError("checkpoint payload is truncated");
    m.resize(rows, cols);
    std::memcpy(m.data(), data_.data() + pos_, bytes);
    pos_ += bytes;
  }
  size_t pos() const { return pos_; }

 private:
  const std::string& data_;
  size_t pos_;
  size_t end_;
};

}  // namespace

Checkpoint Snapshot(PbctModel& model, const RunConfig& config, const Adam* optimizer,
                    const TrainerProgress& progress) {
  Checkpoint c;
  c.config = config;
  c.catalog = model.catalog();
  c.encoder_kind = model.encoder().kind();
  c.tokenizer_kind = model.encoder().tokenizer().kind();
  c.lowercase = config.encoder_lowercase;
  c.vocab = model.encoder().tokenizer().vocab();
  c.transformer = model.encoder().body().config();
  c.model_options = model.options();
  for (const ad::Parameter* p : model.AllParameters()) {
    c.param_names.push_back(p->name);
    c.param_values.push_back(p->value);
  }
  if (optimizer) {
    c.has_optimizer = true;
    c.optimizer = optimizer->state();
  }
  c.progress = progress;
  return c;
}

void SaveCheckpoint(const Checkpoint& c, const std::string& path) {
  json h;
  h["config"] = SerializeConfig(c.config);
  h["catalog"] = {{"labels", c.catalog.labels()},
                  {"counts", c.catalog.counts()},
                  {"num_seen", c.catalog.num_seen()},
                  {"partitioned", c.catalog.partitioned()}};
  h["encoder_kind"] = c.encoder_kind;
  h["tokenizer_kind"] = c.tokenizer_kind;
  h["lowercase"] = c.lowercase;
  h["vocab"] = c.vocab;
  const TransformerConfig& t = c.transformer;
  h["transformer"] = {{"vocab_size", t.vocab_size},
                      {"hidden", t.hidden},
                      {"layers", t.layers},
                      {"heads", t.heads},
                      {"intermediate", t.intermediate},
                      {"max_positions", t.max_positions},
                      {"type_vocab", t.type_vocab},
                      {"layer_norm_eps", t.layer_norm_eps}};
  h["model_options"] = {
      {"distance", c.model_options.distance == DistanceKind::kEuclidean ? "euclidean" : "squared"},
      {"disable_sentinel", c.model_options.disable_sentinel}};
  json params = json::array();
  for (size_t i = 0; i < c.param_names.size(); ++i) {
    params.push_back({{"name", c.param_names[i]}, {"shape", ShapeOf(c.param_values[i])}});
  }
  h["params"] = params;
  h["has_optimizer"] = c.has_optimizer;
  if (c.has_optimizer) {
    json shapes = json::array();
    for (const ad::Matrix& m : c.optimizer.m) shapes.push_back(ShapeOf(m));
    h["optimizer"] = {{"step", c.optimizer.step}, {"shapes", shapes}};
  }
  h["progress"] = {{"step", c.progress.step},
                   {"best_validation_f1", c.progress.best_validation_f1},
                   {"best_step", c.progress.best_step},
                   {"evaluations_since_best", c.progress.evaluations_since_best},
                   {"stopped_early", c.progress.stopped_early}};

  const std::string header = h.dump();
  std::string out(kMagic, sizeof kMagic);
  Put<uint32_t>(out, kCheckpointVersion);
  Put<uint64_t>(out, header.size());
  out += header;
  for (const ad::Matrix& m : c.param_values) PutMatrix(out, m);
  if (c.has_optimizer) {
    for (size_t i = 0; i < c.optimizer.m.size(); ++i) {
      PutMatrix(out, c.optimizer.m[i]);
      PutMatrix(out, c.optimizer.v[i]);
    }
  }
  Put<uint64_t>(out, Fnv1a(out));

  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write checkpoint " + tmp.string());
    os.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!os) throw ConfigError("failed writing checkpoint " + tmp.string());
  }
  fs::rename(tmp, target);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  const size_t fixed = sizeof kMagic + sizeof(uint32_t) + sizeof(uint64_t);
  if (data.size() < fixed + sizeof(uint64_t) ||
      std::memcmp(data.data(), kMagic, sizeof kMagic) != 0) {
    throw FormatError(path + ": not a checkpoint or truncated");
  }
  uint32_t version;
  std::memcpy(&version, data.data() + sizeof kMagic, sizeof version);
  if (version != kCheckpointVersion) {
    throw VersionError(path + ": checkpoint format version " + std::to_string(version) +
                       " is not supported (expected " + std::to_string(kCheckpointVersion) +
                       "); re-export it with the tool version that wrote it");
  }
  uint64_t stored;
  std::memcpy(&stored, data.data() + data.size() - sizeof stored, sizeof stored);
  if (Fnv1a(data.substr(0, data.size() - sizeof stored)) != stored) {
    throw FormatError(path + ": checksum mismatch (truncated or corrupted)");
  }
  uint64_t header_len;
  std::memcpy(&header_len, data.data() + sizeof kMagic + sizeof version, sizeof header_len);
  if (fixed + header_len > data.size() - sizeof stored) {
    throw FormatError(path + ": header is truncated");
  }
  json h;
  try {
    h = json::parse(data.substr(fixed, header_len));
  } catch (const json::exception& e) {
    throw FormatError(path + ": bad header: " + e.what());
  }

  Checkpoint c;
  try {
    c.config = ParseConfig(h.at("config").get<std::string>());
    const json& cat = h.at("catalog");
    c.catalog = EventTypeCatalog(cat.at("labels").get<std::vector<std::string>>(),
                                 cat.at("counts").get<std::vector<int64_t>>());
    if (cat.at("partitioned").get<bool>()) c.catalog.SetPartition(cat.at("num_seen").get<size_t>());
    c.encoder_kind = h.at("encoder_kind").get<std::string>();
    c.tokenizer_kind = h.at("tokenizer_kind").get<std::string>();
    c.lowercase = h.at("lowercase").get<bool>();
    c.vocab = h.at("vocab").get<std::vector<std::string>>();
    const json& t = h.at("transformer");
    c.transformer.vocab_size = t.at("vocab_size");
    c.transformer.hidden = t.at("hidden");
    c.transformer.layers = t.at("layers");
    c.transformer.heads = t.at("heads");
    c.transformer.intermediate = t.at("intermediate");
    c.transformer.max_positions = t.at("max_positions");
    c.transformer.type_vocab = t.at("type_vocab");
    c.transformer.layer_norm_eps = t.at("layer_norm_eps");
    const json& mo = h.at("model_options");
    c.model_options.distance = mo.at("distance") == "euclidean" ? DistanceKind::kEuclidean
                                                                : DistanceKind::kSquaredEuclidean;
    c.model_options.disable_sentinel = mo.at("disable_sentinel");
    const json& pr = h.at("progress");
    c.progress.step = pr.at("step");
    c.progress.best_validation_f1 = pr.at("best_validation_f1");
    c.progress.best_step = pr.at("best_step");
    c.progress.evaluations_since_best = pr.at("evaluations_since_best");
    c.progress.stopped_early = pr.at("stopped_early");

    Reader r(data, fixed + header_len, data.size() - sizeof stored);
    for (const json& p : h.at("params")) {
      c.param_names.push_back(p.at("name").get<std::string>());
      ad::Matrix m;
      r.Matrix(m, p.at("shape")[0], p.at("shape")[1]);
      c.param_values.push_back(std::move(m));
    }
    c.has_optimizer = h.at("has_optimizer").get<bool>();
    if (c.has_optimizer) {
      const json& o = h.at("optimizer");
      c.optimizer.step = o.at("step");
      for (const json& s : o.at("shapes")) {
        ad::Matrix m, v;
        r.Matrix(m, s[0], s[1]);
        r.Matrix(v, s[0], s[1]);
        c.optimizer.m.push_back(std::move(m));
        c.optimizer.v.push_back(std::move(v));
      }
    }
    if (r.pos() != data.size() - sizeof stored) {
      throw FormatError(path + ": unexpected trailing payload");
    }
  } catch (const json::exception& e) {
    throw FormatError(path + ": bad header: " + e.what());
  }
  return c;
}

std::unique_ptr<PbctModel> RestoreModel(const Checkpoint& c) {
  std::unique_ptr<Tokenizer> tokenizer;
  if (c.tokenizer_kind == "word") {
    tokenizer = std::make_unique<WordTokenizer>(c.vocab);
  } else if (c.tokenizer_kind == "wordpiece") {
    tokenizer = std::make_unique<WordPieceTokenizer>(c.vocab, c.lowercase);
  } else {
    throw FormatError("checkpoint names unknown tokenizer '" + c.tokenizer_kind + "'");
  }
  auto body = std::make_unique<Transformer>(c.transformer, 0, 0.0);
  auto encoder =
      std::make_unique<TransformerEncoder>(c.encoder_kind, std::move(tokenizer), std::move(body));
  auto model = std::make_unique<PbctModel>(std::move(encoder), c.catalog, c.model_options);
  LoadParameters(c, *model);
  return model;
}

void LoadParameters(const Checkpoint& c, PbctModel& model) {
  std::vector<ad::Parameter*> params = model.AllParameters();
  if (params.size() != c.param_values.size()) {
    throw FormatError("checkpoint holds " + std::to_string(c.param_values.size()) +
                      " parameters, model has " + std::to_string(params.size()));
  }
  for (size_t i = 0; i < params.size(); ++i) {
    const ad::Matrix& v = c.param_values[i];
    if (params[i]->name != c.param_names[i] || params[i]->value.rows() != v.rows() ||
        params[i]->value.cols() != v.cols()) {
      throw FormatError("checkpoint parameter " + c.param_names[i] + " does not match the model");
    }
    params[i]->value = v;
    params[i]->ZeroGrad();
  }
}

}  // namespace pbct

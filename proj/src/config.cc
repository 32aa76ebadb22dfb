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

#include "pbct/config.h"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <variant>

#include "pbct/status.h"
#include "pbct/utf8.h"

extern char** environ;

namespace pbct {
namespace {

using Field = std::variant<std::string RunConfig::*, double RunConfig::*, int RunConfig::*,
                           uint64_t RunConfig::*, bool RunConfig::*>;

const std::vector<std::pair<std::string, Field>>& Fields() {
  static const std::vector<std::pair<std::string, Field>> kFields = {
      {"corpus", &RunConfig::corpus},
      {"corpus_format", &RunConfig::corpus_format},
      {"synthetic", &RunConfig::synthetic},
      {"split_seed", &RunConfig::split_seed},
      {"paraphrase_mode", &RunConfig::paraphrase_mode},
      {"paraphrase_table", &RunConfig::paraphrase_table},
      {"paraphrase_command", &RunConfig::paraphrase_command},
      {"encoder", &RunConfig::encoder},
      {"encoder_weights", &RunConfig::encoder_weights},
      {"encoder_vocab", &RunConfig::encoder_vocab},
      {"encoder_heads", &RunConfig::encoder_heads},
      {"encoder_lowercase", &RunConfig::encoder_lowercase},
      {"toy_hidden", &RunConfig::toy_hidden},
      {"toy_layers", &RunConfig::toy_layers},
      {"toy_heads", &RunConfig::toy_heads},
      {"toy_intermediate", &RunConfig::toy_intermediate},
      {"toy_max_positions", &RunConfig::toy_max_positions},
      {"toy_init_std", &RunConfig::toy_init_std},
      {"lr_encoder", &RunConfig::lr_encoder},
      {"lr_head", &RunConfig::lr_head},
      {"weight_decay_encoder", &RunConfig::weight_decay_encoder},
      {"weight_decay_head", &RunConfig::weight_decay_head},
      {"grad_clip", &RunConfig::grad_clip},
      {"batch_size", &RunConfig::batch_size},
      {"max_steps", &RunConfig::max_steps},
      {"max_epochs", &RunConfig::max_epochs},
      {"eval_interval", &RunConfig::eval_interval},
      {"patience", &RunConfig::patience},
      {"checkpoint_interval", &RunConfig::checkpoint_interval},
      {"seed", &RunConfig::seed},
      {"lambda", &RunConfig::lambda},
      {"m1", &RunConfig::m1},
      {"m2", &RunConfig::m2},
      {"ground_cost", &RunConfig::ground_cost},
      {"sinkhorn_epsilon", &RunConfig::sinkhorn_epsilon},
      {"distance", &RunConfig::distance},
      {"event_loss_all_types", &RunConfig::event_loss_all_types},
      {"disable_sentinel", &RunConfig::disable_sentinel},
      {"disable_semantic_init", &RunConfig::disable_semantic_init},
      {"disable_contrastive", &RunConfig::disable_contrastive},
      {"unseen_global_argmax", &RunConfig::unseen_global_argmax},
      {"nmi_normalization", &RunConfig::nmi_normalization},
  };
  return kFields;
}

const Field& FindField(std::string_view key) {
  for (const auto& [name, field] : Fields()) {
    if (name == key) return field;
  }
  throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

template <typename T>
T ParseNumber(std::string_view key, const std::string& value) {
  T out{};
  const char* b = value.data();
  const char* e = b + value.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || ptr != e) {
    throw ConfigError("bad value '" + value + "' for " + std::string(key));
  }
  return out;
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

const std::vector<std::string>& ConfigKeys() {
  static const std::vector<std::string> kKeys = [] {
    std::vector<std::string> keys;
    for (const auto& f : Fields()) keys.push_back(f.first);
    return keys;
  }();
  return kKeys;
}

std::string GetConfigValue(const RunConfig& config, std::string_view key) {
  return std::visit(
      [&](auto member) -> std::string {
        const auto& v = config.*member;
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, double>) {
          return FormatDouble(v);
        } else {
          return std::to_string(v);
        }
      },
      FindField(key));
}

void SetConfigValue(RunConfig& config, std::string_view key, const std::string& raw) {
  const std::string value = utf8::Trim(raw);
  std::visit(
      [&](auto member) {
        auto& v = config.*member;
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          v = value;
        } else if constexpr (std::is_same_v<T, bool>) {
          std::string l = utf8::AsciiLower(value);
          if (l == "true" || l == "1" || l == "yes" || l == "on") {
            v = true;
          } else if (l == "false" || l == "0" || l == "no" || l == "off") {
            v = false;
          } else {
            throw ConfigError("bad boolean '" + value + "' for " + std::string(key));
          }
        } else {
          v = ParseNumber<T>(key, value);
        }
      },
      FindField(key));
}

RunConfig Preset(std::string_view name) {
  RunConfig c;
  if (name == "ace") {
    c.lr_encoder = 1e-6;
    c.lr_head = 1e-3;
    c.weight_decay_encoder = 1e-6;
  } else if (name == "ace-m1-2") {
    // Same as "ace" with the larger negative margin favoured by the m1 sweep.
    c = Preset("ace");
    c.m1 = 2.0;
  } else if (name == "fewevent") {
    c.lr_encoder = 1e-5;
    c.lr_head = 1e-2;
    c.weight_decay_encoder = 1e-6;
    c.corpus_format = "fewevent";
  } else if (name == "toy") {
    c.synthetic = "smoke";
    c.encoder = "toy";
    c.lr_encoder = 3e-3;
    c.lr_head = 1e-2;
    c.weight_decay_encoder = 1e-6;
    c.batch_size = 16;
    c.max_steps = 200;
    c.max_epochs = 0;
    c.eval_interval = 50;
    c.patience = 0;
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  return c;
}

std::vector<std::string> PresetNames() { return {"ace", "ace-m1-2", "fewevent", "toy"}; }

RunConfig ParseConfig(std::string_view text, RunConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (utf8::Trim(line).empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = utf8::Trim(std::string_view(line).substr(0, eq));
    std::string value = utf8::Trim(std::string_view(line).substr(eq + 1));
    if (key == "preset") {
      base = Preset(value);
      continue;
    }
    try {
      SetConfigValue(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

RunConfig LoadConfigFile(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str(), std::move(base));
}

std::string SerializeConfig(const RunConfig& config) {
  std::string out;
  for (const std::string& key : ConfigKeys()) {
    out += key + " = " + GetConfigValue(config, key) + "\n";
  }
  return out;
}

void ApplyEnvironment(RunConfig& config, const std::map<std::string, std::string>& env) {
  for (const std::string& key : ConfigKeys()) {
    std::string var(kEnvPrefix);
    for (char c : key) var += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    auto it = env.find(var);
    if (it != env.end()) SetConfigValue(config, key, it->second);
  }
}

void ApplyEnvironment(RunConfig& config) {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    std::string_view kv(*e);
    if (kv.substr(0, kEnvPrefix.size()) != kEnvPrefix) continue;
    size_t eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    env.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
  }
  ApplyEnvironment(config, env);
}

void ValidateConfig(const RunConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(c.lr_encoder > 0.0 && c.lr_head > 0.0, "learning rates must be positive");
  require(c.weight_decay_encoder >= 0.0 && c.weight_decay_head >= 0.0,
          "weight decay must be nonnegative");
  require(c.lambda >= 0.0 && c.m1 >= 0.0 && c.m2 >= 0.0, "lambda, m1 and m2 must be nonnegative");
  require(c.batch_size > 0, "batch_size must be positive");
  require(c.max_steps >= 0 && c.max_epochs >= 0, "step and epoch limits must be nonnegative");
  require(c.max_steps > 0 || c.max_epochs > 0, "set max_steps or max_epochs");
  require(c.patience >= 0 && c.eval_interval >= 0 && c.checkpoint_interval >= 0,
          "intervals must be nonnegative");
  require(c.grad_clip >= 0.0, "grad_clip must be nonnegative");
  require(c.sinkhorn_epsilon > 0.0, "sinkhorn_epsilon must be positive");
  require(c.encoder == "toy" || c.encoder == "pretrained", "encoder must be toy or pretrained");
  require(c.encoder != "pretrained" || (!c.encoder_weights.empty() && !c.encoder_vocab.empty()),
          "pretrained encoder needs encoder_weights and encoder_vocab");
  require(c.ground_cost == "indicator" || c.ground_cost == "prototype_metric",
          "ground_cost must be indicator or prototype_metric");
  require(c.distance == "euclidean" || c.distance == "squared",
          "distance must be euclidean or squared");
  require(c.nmi_normalization == "arithmetic" || c.nmi_normalization == "geometric",
          "nmi_normalization must be arithmetic or geometric");
  require(c.corpus_format == "jsonl" || c.corpus_format == "fewevent",
          "corpus_format must be jsonl or fewevent");
  require(c.synthetic.empty() || c.synthetic == "smoke" || c.synthetic == "ace",
          "synthetic must be empty, smoke or ace");
  require(!c.corpus.empty() || !c.synthetic.empty(), "no corpus configured");
  require(c.paraphrase_mode == "identity_stub" || c.paraphrase_mode == "cached_table" ||
              c.paraphrase_mode == "external_backtranslation",
          "unknown paraphrase_mode");
  // Synthetic corpora carry their own table.
  require(
      c.paraphrase_mode != "cached_table" || !c.paraphrase_table.empty() || !c.synthetic.empty(),
      "cached_table needs paraphrase_table");
  require(c.paraphrase_mode != "external_backtranslation" || !c.paraphrase_command.empty(),
          "external_backtranslation needs paraphrase_command");
  require(c.toy_hidden > 0 && c.toy_heads > 0 && c.toy_hidden % c.toy_heads == 0,
          "toy_hidden must be a positive multiple of toy_heads");
  require(c.toy_layers > 0 && c.toy_intermediate > 0 && c.toy_max_positions > 8,
          "toy encoder dimensions must be positive");
  require(c.toy_init_std > 0.0, "toy_init_std must be positive");
}

}  // namespace pbct

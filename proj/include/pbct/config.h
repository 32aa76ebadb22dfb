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

// Run configuration: a flat "key = value" file ('#' starts a comment),
// overridable per key by environment variables named PBCT_<KEY> in upper
// case (PBCT_LR_HEAD=0.01).

#ifndef PBCT_CONFIG_H_
#define PBCT_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace pbct {

inline constexpr std::string_view kEnvPrefix = "PBCT_";
inline constexpr std::string_view kToolVersion = "1.0.0";

struct RunConfig {
  // Data.
  std::string corpus;  // canonical or FewEvent file; empty with synthetic
  std::string corpus_format = "jsonl";
  std::string synthetic;  // "", "smoke" or "ace"
  uint64_t split_seed = 13;
  std::string paraphrase_mode = "identity_stub";
  std::string paraphrase_table;
  std::string paraphrase_command;

  // Encoder.
  std::string encoder = "toy";  // toy | pretrained
  std::string encoder_weights;
  std::string encoder_vocab;
  int encoder_heads = 12;
  bool encoder_lowercase = true;
  int toy_hidden = 32;
  int toy_layers = 2;
  int toy_heads = 2;
  int toy_intermediate = 64;
  int toy_max_positions = 128;
  double toy_init_std = 0.1;

  // Optimization.
  double lr_encoder = 1e-6;
  double lr_head = 1e-3;
  double weight_decay_encoder = 1e-6;
  double weight_decay_head = 0.0;
  double grad_clip = 1.0;
  int batch_size = 16;
  int max_steps = 0;  // 0: bounded by max_epochs only
  int max_epochs = 10;
  int eval_interval = 0;        // steps between validation passes; 0: per epoch
  int patience = 5;             // validation passes without improvement; 0: off
  int checkpoint_interval = 0;  // steps; 0: only the final checkpoint
  uint64_t seed = 42;

  // Objective.
  double lambda = 0.7;
  double m1 = 1.0;
  double m2 = 0.6;
  std::string ground_cost = "indicator";
  double sinkhorn_epsilon = 0.05;
  std::string distance = "euclidean";  // euclidean | squared
  bool event_loss_all_types = false;

  // Ablations.
  bool disable_sentinel = false;
  bool disable_semantic_init = false;
  bool disable_contrastive = false;

  // Evaluation.
  bool unseen_global_argmax = false;
  std::string nmi_normalization = "arithmetic";  // arithmetic | geometric

  bool operator==(const RunConfig&) const = default;
};

// Ordered key names as they appear in serialized files.
const std::vector<std::string>& ConfigKeys();

std::string GetConfigValue(const RunConfig& config, std::string_view key);
// Throws ConfigError on an unknown key or an unparsable value.
void SetConfigValue(RunConfig& config, std::string_view key, const std::string& value);

// Named starting points: "ace", "ace-m1-2", "fewevent", "toy".
RunConfig Preset(std::string_view name);
std::vector<std::string> PresetNames();

RunConfig ParseConfig(std::string_view text, RunConfig base = {});
RunConfig LoadConfigFile(const std::string& path, RunConfig base = {});
std::string SerializeConfig(const RunConfig& config);

// Applies PBCT_<KEY> variables from `env` (or the process environment).
void ApplyEnvironment(RunConfig& config);
void ApplyEnvironment(RunConfig& config, const std::map<std::string, std::string>& env);

// Checks ranges and enumerations; throws ConfigError.
void ValidateConfig(const RunConfig& config);

}  // namespace pbct

#endif  // PBCT_CONFIG_H_

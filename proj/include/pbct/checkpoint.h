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

// Self-describing binary checkpoints.
//
// Layout: 8-byte magic "PBCTCKPT", u32 format version, u64 header length,
// JSON header, raw little-endian float64 payload, u64 FNV-1a checksum of
// every preceding byte. The header carries the run configuration, the
// catalog, the vocabulary and the encoder shape, so a checkpoint rebuilds
// the model without any other file.

#ifndef PBCT_CHECKPOINT_H_
#define PBCT_CHECKPOINT_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pbct/config.h"
#include "pbct/corpus.h"
#include "pbct/model.h"
#include "pbct/optimizer.h"

namespace pbct {

inline constexpr uint32_t kCheckpointVersion = 1;

struct TrainerProgress {
  int64_t step = 0;
  double best_validation_f1 = -1.0;
  int64_t best_step = -1;
  int evaluations_since_best = 0;
  bool stopped_early = false;

  bool operator==(const TrainerProgress&) const = default;
};

struct Checkpoint {
  RunConfig config;
  EventTypeCatalog catalog;
  std::string encoder_kind;    // "toy" or "pretrained"
  std::string tokenizer_kind;  // "word" or "wordpiece"
  bool lowercase = true;
  std::vector<std::string> vocab;
  TransformerConfig transformer;
  ModelOptions model_options;
  // Every model parameter in PbctModel::AllParameters() order.
  std::vector<std::string> param_names;
  std::vector<ad::Matrix> param_values;
  bool has_optimizer = false;
  AdamState optimizer;
  TrainerProgress progress;
};

Checkpoint Snapshot(PbctModel& model, const RunConfig& config, const Adam* optimizer,
                    const TrainerProgress& progress);

// Writes to a temporary sibling and renames it into place.
void SaveCheckpoint(const Checkpoint& ckpt, const std::string& path);
// Throws VersionError for another format version, FormatError for damaged
// or truncated files.
Checkpoint LoadCheckpoint(const std::string& path);

// Rebuilds the model recorded in `ckpt`, honoring its ablation flags.
std::unique_ptr<PbctModel> RestoreModel(const Checkpoint& ckpt);
// Copies parameter values from `ckpt` into an existing model.
void LoadParameters(const Checkpoint& ckpt, PbctModel& model);

}  // namespace pbct

#endif  // PBCT_CHECKPOINT_H_

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

// The full model: encoder, sentinel gate and prototype matrix, with one
// forward path shared by training, evaluation and inference.

#ifndef PBCT_MODEL_H_
#define PBCT_MODEL_H_

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pbct/corpus.h"
#include "pbct/encoder.h"
#include "pbct/heads.h"

namespace pbct {

struct ModelOptions {
  DistanceKind distance = DistanceKind::kEuclidean;
  // Replaces the gate by the plain sum context + mask.
  bool disable_sentinel = false;
};

struct ViewOutput {
  PromptEncoding prompt;
  PromptOutputs encoded;
  TriggerDistribution trigger;
  ad::Var gate;  // 1 x 2 (g0, g1); null when the sentinel is disabled
  ad::Var event_vector;
  Classification classification;
};

class PbctModel {
 public:
  // `catalog` must be partitioned (seen types first).
  PbctModel(std::unique_ptr<TransformerEncoder> encoder, EventTypeCatalog catalog,
            ModelOptions options);

  // Semantic initialization encodes the joined labels; otherwise rows are
  // drawn from N(0, 0.02^2) under `seed`.
  void InitializePrototypes(bool semantic, uint64_t seed);

  ViewOutput Forward(const EventMention& mention,
                     std::optional<std::span<const int>> restrict = std::nullopt) const;

  const TransformerEncoder& encoder() const { return *encoder_; }
  const EventTypeCatalog& catalog() const { return catalog_; }
  const ModelOptions& options() const { return options_; }
  const Sentinel& sentinel() const { return sentinel_; }
  Sentinel& sentinel() { return sentinel_; }
  const ad::Parameter& prototypes() const { return prototypes_; }
  ad::Parameter& prototypes() { return prototypes_; }
  int num_types() const { return static_cast<int>(catalog_.size()); }
  int num_seen() const { return static_cast<int>(catalog_.num_seen()); }
  const std::vector<int>& unseen_rows() const { return catalog_.unseen(); }

  std::vector<ad::Parameter*> EncoderParameters() const;
  std::vector<ad::Parameter*> HeadParameters();
  std::vector<ad::Parameter*> AllParameters();

 private:
  std::unique_ptr<TransformerEncoder> encoder_;
  EventTypeCatalog catalog_;
  ModelOptions options_;
  Sentinel sentinel_;
  ad::Parameter prototypes_;
};

}  // namespace pbct

#endif  // PBCT_MODEL_H_

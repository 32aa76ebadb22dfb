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

// Model heads on top of a prompt encoding: the trigger distribution over
// mention tokens, the two-way sentinel gate, the gated event vector and
// distance-based prototype classification.

#ifndef PBCT_HEADS_H_
#define PBCT_HEADS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pbct/autodiff.h"
#include "pbct/encoder.h"

namespace pbct {

struct TriggerDistribution {
  ad::Var log_probs;  // 1 x mention_size
  std::vector<double> probs;
  int best_offset = 0;    // argmax, relative to mention_first
  int best_position = 0;  // argmax, prompt token index
  std::string best_token_text;
  TriggerSpan best_word_span;  // code points in the mention
};

// Mask-fill logits gathered at each mention token's vocabulary id, then
// normalized over the mention positions only.
TriggerDistribution ComputeTriggerDistribution(const ad::Var& mask_logits,
                                               const PromptEncoding& pe);

class Sentinel {
 public:
  explicit Sentinel(int hidden);

  ad::Parameter& weight() { return weight_; }  // 2h x 2
  ad::Parameter& bias() { return bias_; }      // 1 x 2
  const ad::Parameter& weight() const { return weight_; }
  const ad::Parameter& bias() const { return bias_; }

 private:
  ad::Parameter weight_;
  ad::Parameter bias_;
};

// (g0, g1) = softmax([context, mask] W + b) as a 1 x 2 row.
ad::Var SentinelWeights(const Sentinel& sentinel, const ad::Var& context, const ad::Var& mask);

// g0 * context + g1 * mask.
ad::Var EventVector(const ad::Var& g, const ad::Var& context, const ad::Var& mask);

enum class DistanceKind { kEuclidean, kSquaredEuclidean };

struct Classification {
  ad::Var logits;                  // 1 x |support|, negative distances
  ad::Var probs;                   // 1 x |support|
  std::vector<int> support;        // type index of each column
  std::vector<double> full_probs;  // length |types|, zero off support
  int prediction = -1;             // type index; lowest index on ties
};

// softmax(-d(x, c_j)) over `restrict` (all rows when absent).
Classification Classify(const ad::Var& x, const ad::Var& prototypes,
                        std::optional<std::span<const int>> restrict,
                        DistanceKind distance = DistanceKind::kEuclidean);

}  // namespace pbct

#endif  // PBCT_HEADS_H_

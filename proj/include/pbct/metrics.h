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

// Classification and clustering scores over integer labels. A score whose
// input subset is empty is nullopt, never 0.

#ifndef PBCT_METRICS_H_
#define PBCT_METRICS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pbct {

struct LabelScores {
  int label = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int64_t support = 0;    // gold count
  int64_t predicted = 0;  // predicted count
};

struct WeightedScores {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::vector<LabelScores> per_label;  // union of gold and predicted labels
};

// Support-weighted averages of per-label precision, recall and F1. Labels
// never predicted score precision 0; labels without gold support get
// weight 0.
WeightedScores WeightedPrf(std::span<const int> gold, std::span<const int> pred);

enum class NmiNormalization { kArithmetic, kGeometric };

// I(G; P) over the chosen mean of H(G) and H(P). Two single-cluster
// labelings score 1.
std::optional<double> NormalizedMutualInformation(
    std::span<const int> gold, std::span<const int> pred,
    NmiNormalization norm = NmiNormalization::kArithmetic);

// TP / sqrt((TP + FP)(TP + FN)) over same-cluster pairs. Two all-singleton
// labelings have identical (empty) pair sets and score 1.
std::optional<double> FowlkesMallows(std::span<const int> gold, std::span<const int> pred);

}  // namespace pbct

#endif  // PBCT_METRICS_H_

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

// Training objectives. Unseen mentions contribute exactly zero to the
// trigger and event losses: the returned node is a constant, so no gradient
// path exists.

#ifndef PBCT_LOSSES_H_
#define PBCT_LOSSES_H_

#include <span>

#include "pbct/autodiff.h"
#include "pbct/corpus.h"
#include "pbct/heads.h"
#include "pbct/transport.h"

namespace pbct {

// -sum_i P_gt(i) log P_t(i), with P_gt uniform over `gold_offsets`
// (mention-relative token positions).
ad::Var TriggerLoss(const TriggerDistribution& dist, std::span<const int> gold_offsets,
                    Visibility visibility);

// -log of the gold probability renormalized over the first `num_seen`
// types. With `all_types`, the softmax over every type is used instead.
// `logits` is the 1 x |types| unrestricted classification output.
ad::Var EventLoss(const ad::Var& logits, int gold_type, Visibility visibility, int num_seen,
                  bool all_types = false);

struct ContrastiveTerms {
  ad::Var loss;  // d1 + d2_clamped + d3_clamped
  ad::Var d1;
  ad::Var d2;
  ad::Var d3;
  ad::Var d2_clamped;  // min(m2, d2)
  ad::Var d3_clamped;  // max(0, m1 - d3)
};

// p0..p3: original, rephrased, masked and negative type distributions.
ContrastiveTerms ContrastiveLoss(const ad::Var& p0, const ad::Var& p1, const ad::Var& p2,
                                 const ad::Var& p3, double m1, double m2, const GroundCost& cost,
                                 const SinkhornOptions& sinkhorn = {});

// l_eve + l_tri + lambda * l_con.
ad::Var TotalLoss(const ad::Var& l_eve, const ad::Var& l_tri, const ad::Var& l_con, double lambda);
double TotalLoss(double l_eve, double l_tri, double l_con, double lambda);

struct LossBreakdown {
  double l_tri = 0.0;
  double l_eve = 0.0;
  double l_con = 0.0;
  double total = 0.0;
  double d1 = 0.0;
  double d2_clamped = 0.0;
  double d3_clamped = 0.0;
};

}  // namespace pbct

#endif  // PBCT_LOSSES_H_

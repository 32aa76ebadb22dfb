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

#include "pbct/losses.h"

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "pbct/status.h"

namespace pbct {
namespace {

void CheckProbabilityRow(const ad::Var& p, const char* name) {
  const ad::Matrix& v = p->value();
  if (v.rows() != 1 || !v.allFinite() || v.minCoeff() < -1e-12 || std::abs(v.sum() - 1.0) > 1e-6) {
    throw NumericError(std::string(name) + " is not a probability row");
  }
}

}  // namespace

ad::Var TriggerLoss(const TriggerDistribution& dist, std::span<const int> gold_offsets,
                    Visibility visibility) {
  if (visibility == Visibility::kUnseen) return ad::Scalar(0.0);
  if (gold_offsets.empty()) throw ConfigError("seen mention without gold trigger tokens");
  const int n = static_cast<int>(dist.log_probs->cols());
  std::vector<int> cols(gold_offsets.begin(), gold_offsets.end());
  for (int c : cols) {
    if (c < 0 || c >= n) throw ConfigError("gold trigger outside the mention range");
  }
  return ad::Neg(ad::Mean(ad::GatherCols(dist.log_probs, cols)));
}

ad::Var EventLoss(const ad::Var& logits, int gold_type, Visibility visibility, int num_seen,
                  bool all_types) {
  if (visibility == Visibility::kUnseen) return ad::Scalar(0.0);
  if (gold_type < 0 || gold_type >= num_seen) {
    throw ConfigError("seen mention with a gold type outside the seen block");
  }
  if (all_types) {
    return ad::Neg(ad::Element(ad::LogSoftmaxRows(logits), 0, gold_type));
  }
  std::vector<int> seen(static_cast<size_t>(num_seen));
  std::iota(seen.begin(), seen.end(), 0);
  ad::Var lp = ad::LogSoftmaxRows(ad::GatherCols(logits, seen));
  return ad::Neg(ad::Element(lp, 0, gold_type));
}

ContrastiveTerms ContrastiveLoss(const ad::Var& p0, const ad::Var& p1, const ad::Var& p2,
                                 const ad::Var& p3, double m1, double m2, const GroundCost& cost,
                                 const SinkhornOptions& sinkhorn) {
  if (!(m1 > 0.0) || !(m2 > 0.0)) throw ConfigError("margins must be positive");
  CheckProbabilityRow(p0, "p0");
  CheckProbabilityRow(p1, "p1");
  CheckProbabilityRow(p2, "p2");
  CheckProbabilityRow(p3, "p3");
  ContrastiveTerms t;
  t.d1 = TransportVar(p1, p0, cost, sinkhorn);
  t.d2 = TransportVar(p2, p0, cost, sinkhorn);
  t.d3 = TransportVar(p3, p0, cost, sinkhorn);
  t.d2_clamped = ad::MinConst(t.d2, m2);
  t.d3_clamped = ad::Relu(ad::Sub(ad::Scalar(m1), t.d3));
  t.loss = ad::SumVars({t.d1, t.d2_clamped, t.d3_clamped});
  return t;
}

ad::Var TotalLoss(const ad::Var& l_eve, const ad::Var& l_tri, const ad::Var& l_con, double lambda) {
  if (lambda < 0.0) throw ConfigError("lambda must be nonnegative");
  return ad::SumVars({l_eve, l_tri, ad::Scale(l_con, lambda)});
}

double TotalLoss(double l_eve, double l_tri, double l_con, double lambda) {
  if (lambda < 0.0) throw ConfigError("lambda must be nonnegative");
  return l_eve + l_tri + lambda * l_con;
}

}  // namespace pbct

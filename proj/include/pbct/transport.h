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

// Discrete optimal transport between distributions over event types.
//
// Exact values come from a min-cost-flow solve (indicator costs reduce to
// total variation). The differentiable training forms are the closed-form
// total variation and an entropic Sinkhorn solve whose reported value is the
// transport cost of the regularized plan.

#ifndef PBCT_TRANSPORT_H_
#define PBCT_TRANSPORT_H_

#include <span>
#include <string_view>

#include "pbct/autodiff.h"

namespace pbct {

enum class CostKind { kIndicator, kPrototypeMetric };

CostKind ParseCostKind(std::string_view name);
std::string_view CostKindName(CostKind kind);

class GroundCost {
 public:
  // c(i, j) = [i != j] over k types.
  static GroundCost Indicator(int k);
  // c(i, j) = ||c_i - c_j||_2 between prototype rows.
  static GroundCost PrototypeMetric(const ad::Matrix& prototypes);
  // Validates: square, zero diagonal, nonnegative, symmetric.
  static GroundCost FromMatrix(ad::Matrix costs);

  CostKind kind() const { return kind_; }
  int size() const { return static_cast<int>(matrix_.rows()); }
  const ad::Matrix& matrix() const { return matrix_; }

 private:
  GroundCost(CostKind kind, ad::Matrix m) : kind_(kind), matrix_(std::move(m)) {}

  CostKind kind_;
  ad::Matrix matrix_;
};

// Exact optimal transport value. Throws on length mismatch or when either
// input is not a distribution within 1e-6.
double Wasserstein(std::span<const double> p, std::span<const double> q, const GroundCost& cost);

// Exact value for an arbitrary cost matrix by successive shortest paths.
double TransportLinearProgram(std::span<const double> p, std::span<const double> q,
                              const ad::Matrix& cost);

double TotalVariation(std::span<const double> p, std::span<const double> q);

struct SinkhornOptions {
  // Regularization relative to the largest cost entry.
  double epsilon = 0.05;
  int max_iterations = 5000;
  double tolerance = 1e-12;
};

// <gamma_eps, C> for the Sinkhorn plan.
double SinkhornCost(std::span<const double> p, std::span<const double> q, const ad::Matrix& cost,
                    const SinkhornOptions& options = {});

// Differentiable distances between two 1 x k probability rows. The cost is
// constant with respect to gradients.
ad::Var TotalVariationVar(const ad::Var& p, const ad::Var& q);
ad::Var SinkhornVar(const ad::Var& p, const ad::Var& q, const ad::Matrix& cost,
                    const SinkhornOptions& options = {});

// Training form for `cost`: closed form for indicator, Sinkhorn otherwise.
ad::Var TransportVar(const ad::Var& p, const ad::Var& q, const GroundCost& cost,
                     const SinkhornOptions& options = {});

}  // namespace pbct

#endif  // PBCT_TRANSPORT_H_

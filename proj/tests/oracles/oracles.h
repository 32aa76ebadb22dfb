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

// Reference implementations for tests. Everything here is written from
// first principles over plain std::vector and must not include any library
// header; the build links this target against nothing but the standard
// library, and a test scans the sources to keep it that way.

#ifndef PBCT_TESTS_ORACLES_H_
#define PBCT_TESTS_ORACLES_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major, rows of equal length

// --- transport --------------------------------------------------------------

// Optimum of the transportation program min <gamma, C> subject to
// gamma 1 = p, gamma^T 1 = q, gamma >= 0, solved with a dense two-phase
// tableau simplex under Bland's rule.
double TransportSimplex(const Vec& p, const Vec& q, const Mat& cost);

// 0.5 * sum |p_i - q_i|.
double HalfL1(const Vec& p, const Vec& q);

// A feasible coupling: cells visited in the given order, each filled with
// the largest mass the remaining marginals allow.
Mat GreedyCoupling(const Vec& p, const Vec& q, const std::vector<int>& cell_order);

double CouplingCost(const Mat& gamma, const Mat& cost);

// --- assignment --------------------------------------------------------------

struct PermutationResult {
  std::vector<int> row_to_col;
  int64_t value = 0;
};

// Maximum of sum_i counts[i][perm[i]] over all k! permutations. Throws
// std::invalid_argument for k > 6 or a non-square matrix.
PermutationResult PermutationAssignment(const std::vector<std::vector<int64_t>>& counts);

// --- clustering and classification metrics ------------------------------------

struct ClusteringScores {
  double nmi = 0.0;
  double fm = 0.0;
};

// NMI from explicit entropy and mutual-information sums (arithmetic or
// geometric mean normalization), FM from enumeration of all n(n-1)/2 pairs.
// Conventions: two single-cluster labelings have NMI 1; a zero
// normalizer gives NMI 0; no same-cluster pair on either side gives FM 1.
// nullopt for empty input.
std::optional<ClusteringScores> PairwiseClusteringMetrics(const std::vector<int>& gold,
                                                          const std::vector<int>& pred,
                                                          bool geometric = false);

struct WeightedPrf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Per-label scores from direct counting, averaged with gold-support weights.
WeightedPrf WeightedScores(const std::vector<int>& gold, const std::vector<int>& pred);

// --- encoder -----------------------------------------------------------------

struct ToyLayer {
  Mat wq, wk, wv, wo;  // h x h, applied as x W
  Vec bq, bk, bv, bo;
  Vec ln1_g, ln1_b;
  Mat w1;  // h x f
  Vec b1;
  Mat w2;  // f x h
  Vec b2;
  Vec ln2_g, ln2_b;
};

struct ToyWeights {
  int heads = 1;
  double eps = 1e-12;
  Mat word, position, type;
  Vec emb_g, emb_b;
  std::vector<ToyLayer> layers;
  Mat head_w;  // h x h
  Vec head_b, head_g, head_beta;
  Vec out_bias;  // |vocab|
};

// Post-norm transformer forward pass with exact (erf) GELU, written as
// explicit loops. Returns one hidden row per token.
Mat ToyEncode(const ToyWeights& w, const std::vector<int>& ids);

// Mask-fill logits of one hidden row (tied output embedding).
Vec ToyMaskLogits(const ToyWeights& w, const Vec& hidden_row);

// --- gradients ---------------------------------------------------------------

// Central differences (f(x + s e_i) - f(x - s e_i)) / 2s. Throws
// std::domain_error on a non-finite evaluation and std::invalid_argument
// for step <= 0.
Vec FiniteDifferenceGradient(const std::function<double(const Vec&)>& f, const Vec& x, double step);

// --- registry ----------------------------------------------------------------

struct OracleEntry {
  std::string name;
  std::string production;  // counterpart under test
  double tolerance = 0.0;
  bool relative = false;
  // Runs the oracle on its own closed-form examples.
  std::function<bool()> self_check;
};

const std::vector<OracleEntry>& Registry();

}  // namespace oracle

#endif  // PBCT_TESTS_ORACLES_H_

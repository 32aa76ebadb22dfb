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

#include "pbct/metrics.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.h"
#include "pbct/evaluation.h"
#include "pbct/hungarian.h"

namespace pbct {
namespace {

std::vector<int> RandomLabels(std::mt19937_64& rng, int n, int k) {
  std::uniform_int_distribution<int> u(0, k - 1);
  std::vector<int> v(n);
  for (int& x : v) x = u(rng);
  return v;
}

TEST(WeightedPrf, MatchesOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial * 2;
    auto gold = RandomLabels(rng, n, 2 + trial % 5);
    auto pred = RandomLabels(rng, n, 2 + trial % 7);
    WeightedScores s = WeightedPrf(gold, pred);
    oracle::WeightedPrf o = oracle::WeightedScores(gold, pred);
    ASSERT_TRUE(s.f1);
    EXPECT_NEAR(*s.precision, o.precision, 1e-12);
    EXPECT_NEAR(*s.recall, o.recall, 1e-12);
    EXPECT_NEAR(*s.f1, o.f1, 1e-12);
  }
}

TEST(WeightedPrf, EmptyIsUndefined) {
  std::vector<int> none;
  EXPECT_FALSE(WeightedPrf(none, none).f1);
}

TEST(Clustering, MatchesPairwiseOracle) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + (trial * 37) % 200;
    auto gold = RandomLabels(rng, n, 1 + trial % 5);
    auto pred = RandomLabels(rng, n, 1 + (trial / 5) % 6);
    for (bool geometric : {false, true}) {
      auto o = oracle::PairwiseClusteringMetrics(gold, pred, geometric);
      auto nmi = NormalizedMutualInformation(
          gold, pred, geometric ? NmiNormalization::kGeometric : NmiNormalization::kArithmetic);
      ASSERT_TRUE(o && nmi);
      EXPECT_NEAR(*nmi, o->nmi, 1e-9) << "trial " << trial;
      EXPECT_NEAR(*FowlkesMallows(gold, pred), o->fm, 1e-9) << "trial " << trial;
    }
  }
}

TEST(Clustering, HandCases) {
  std::vector<int> gold = {0, 0, 1, 1}, pred = {0, 0, 0, 1};
  EXPECT_NEAR(*FowlkesMallows(gold, pred), 1.0 / std::sqrt(6.0), 1e-15);
  std::vector<int> relabeled = {5, 5, 2, 2};
  EXPECT_DOUBLE_EQ(*NormalizedMutualInformation(gold, relabeled), 1.0);
  EXPECT_DOUBLE_EQ(*FowlkesMallows(gold, relabeled), 1.0);
  std::vector<int> none;
  EXPECT_FALSE(NormalizedMutualInformation(none, none));
  EXPECT_FALSE(FowlkesMallows(none, none));
}

TEST(Assignment, MatchesPermutationBruteForce) {
  std::mt19937_64 rng(33);
  std::uniform_int_distribution<int64_t> u(0, 30);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 1 + trial % 6;
    std::vector<std::vector<int64_t>> counts(k, std::vector<int64_t>(k));
    for (auto& row : counts)
      for (auto& c : row) c = u(rng);
    Assignment a = MaxWeightAssignment(counts);
    oracle::PermutationResult o = oracle::PermutationAssignment(counts);
    EXPECT_EQ(a.value, o.value);
    int64_t realized = 0;
    for (int i = 0; i < k; ++i) realized += counts[i][a.row_to_col[i]];
    EXPECT_EQ(realized, a.value);
  }
}

TEST(Assignment, RectangularLeavesRowsUnmatched) {
  Assignment a = MaxWeightAssignment({{1, 9}, {8, 0}, {7, 7}});
  EXPECT_EQ(a.value, 17);
  EXPECT_EQ(std::count(a.row_to_col.begin(), a.row_to_col.end(), -1), 1);
}

TEST(HungarianMap, Examples) {
  // Diagonal confusion: rows 3, 4 onto types 3, 4.
  std::vector<int> rows = {3, 4}, types = {3, 4};
  std::vector<int> pred = {3, 3, 4}, gold = {3, 3, 4};
  Mapping id = HungarianMap(pred, gold, rows, types);
  EXPECT_EQ(id.pairs, (std::vector<std::pair<int, int>>{{3, 3}, {4, 4}}));
  // Confusion [[0, 5], [7, 0]] swaps, 12 matches.
  std::vector<int> p2, g2;
  for (int i = 0; i < 5; ++i) p2.push_back(3), g2.push_back(4);
  for (int i = 0; i < 7; ++i) p2.push_back(4), g2.push_back(3);
  Mapping swap = HungarianMap(p2, g2, rows, types);
  EXPECT_EQ(swap.matches, 12);
  EXPECT_EQ(swap.pairs, (std::vector<std::pair<int, int>>{{3, 4}, {4, 3}}));
}

EventTypeCatalog TwoByTwo() {
  EventTypeCatalog c({"a", "b", "x", "y"}, {4, 4, 4, 4});
  c.SetPartition(2);
  return c;
}

Prediction P(int gold, int pred, Visibility v) {
  Prediction p;
  p.gold_type = gold;
  p.predicted = pred;
  p.visibility = v;
  return p;
}

TEST(ComputeMetrics, PerfectAndRelabeledPredictions) {
  EventTypeCatalog c = TwoByTwo();
  std::vector<Prediction> preds = {P(0, 0, Visibility::kSeen), P(1, 1, Visibility::kSeen),
                                   P(2, 3, Visibility::kUnseen), P(2, 3, Visibility::kUnseen),
                                   P(3, 2, Visibility::kUnseen)};
  MetricsReport r = ComputeMetrics(preds, c);
  EXPECT_DOUBLE_EQ(*r.f1_seen, 1.0);
  EXPECT_DOUBLE_EQ(*r.f1_unseen, 1.0);
  EXPECT_DOUBLE_EQ(*r.nmi, 1.0);
  EXPECT_DOUBLE_EQ(*r.fm, 1.0);
  EXPECT_DOUBLE_EQ(*r.weighted_f1, 1.0);
  EXPECT_DOUBLE_EQ(*r.weighted_precision, 1.0);
  EXPECT_DOUBLE_EQ(*r.weighted_recall, 1.0);
}

TEST(ComputeMetrics, EmptySubsetsAreUndefined) {
  EventTypeCatalog c = TwoByTwo();
  std::vector<Prediction> seen_only = {P(0, 0, Visibility::kSeen), P(1, 0, Visibility::kSeen)};
  MetricsReport r = ComputeMetrics(seen_only, c);
  EXPECT_TRUE(r.f1_seen);
  EXPECT_FALSE(r.f1_unseen);
  EXPECT_FALSE(r.nmi);
  EXPECT_FALSE(r.fm);
  EXPECT_EQ(MetricsToJson(r)["f1_unseen"], nullptr);
}

TEST(ComputeMetrics, HandClusteringCase) {
  EventTypeCatalog c = TwoByTwo();
  std::vector<Prediction> preds = {P(2, 2, Visibility::kUnseen), P(2, 2, Visibility::kUnseen),
                                   P(3, 2, Visibility::kUnseen), P(3, 3, Visibility::kUnseen)};
  MetricsReport r = ComputeMetrics(preds, c);
  EXPECT_NEAR(*r.fm, 1.0 / std::sqrt(6.0), 1e-15);
  EXPECT_EQ(r.hungarian.matches, 3);
}

}  // namespace
}  // namespace pbct

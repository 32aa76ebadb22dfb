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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.h"
#include "pbct/status.h"
#include "test_support.h"

namespace pbct {
namespace {

using testing::RandomDistribution;
using testing::Row;

TriggerDistribution FromProbs(const std::vector<double>& probs) {
  std::vector<double> logs;
  for (double p : probs) logs.push_back(std::log(p));
  TriggerDistribution d;
  d.log_probs = Row(logs);
  d.probs = probs;
  return d;
}

TEST(TriggerLoss, Examples) {
  std::vector<int> gold = {0};
  EXPECT_EQ(TriggerLoss(FromProbs({0.25, 0.25, 0.25, 0.25}), gold, Visibility::kUnseen)->scalar(),
            0.0);
  EXPECT_EQ(TriggerLoss(FromProbs({1.0}), gold, Visibility::kSeen)->scalar(), 0.0);
  std::vector<int> third = {2};
  EXPECT_NEAR(TriggerLoss(FromProbs({0.25, 0.25, 0.25, 0.25}), third, Visibility::kSeen)->scalar(),
              std::log(4.0), 1e-12);
}

TEST(TriggerLoss, MultiTokenGoldSplitsMassEvenly) {
  std::vector<int> gold = {1, 2};
  const double got = TriggerLoss(FromProbs({0.1, 0.2, 0.7}), gold, Visibility::kSeen)->scalar();
  EXPECT_NEAR(got, -0.5 * std::log(0.2) - 0.5 * std::log(0.7), 1e-12);
}

TEST(TriggerLoss, RejectsPositionsOutsideMention) {
  std::vector<int> gold = {3};
  EXPECT_THROW(TriggerLoss(FromProbs({0.5, 0.5}), gold, Visibility::kSeen), Error);
}

TEST(EventLoss, Examples) {
  EXPECT_EQ(EventLoss(Row({1.0, 2.0, 3.0}), -1, Visibility::kUnseen, 2)->scalar(), 0.0);
  // Seen softmax over 17 equal logits; unseen columns do not enter.
  std::vector<double> logits(33, 0.0);
  logits[20] = 50.0;
  EXPECT_NEAR(EventLoss(Row(logits), 4, Visibility::kSeen, 17)->scalar(), std::log(17.0), 1e-12);
  std::vector<double> peaked = {0.0, 80.0, -3.0};
  EXPECT_NEAR(EventLoss(Row(peaked), 1, Visibility::kSeen, 2)->scalar(), 0.0, 1e-12);
  EXPECT_THROW(EventLoss(Row(peaked), 2, Visibility::kSeen, 2), Error);
}

TEST(EventLoss, UnseenBranchHasNoGradient) {
  ad::Parameter logits("logits", testing::ToMatrix({{0.3, -1.0, 2.0}}));
  ad::Var l = EventLoss(ad::Leaf(logits), 0, Visibility::kUnseen, 2);
  ad::Backward(l);
  EXPECT_EQ(logits.grad.norm(), 0.0);
}

TEST(ContrastiveLoss, WorkedBundle) {
  ContrastiveTerms t = ContrastiveLoss(Row({1, 0}), Row({0.8, 0.2}), Row({0.5, 0.5}), Row({0, 1}),
                                       1.0, 0.6, GroundCost::Indicator(2));
  EXPECT_NEAR(t.d1->scalar(), 0.2, 1e-12);
  EXPECT_NEAR(t.d2_clamped->scalar(), 0.5, 1e-12);
  EXPECT_NEAR(t.d3_clamped->scalar(), 0.0, 1e-12);
  EXPECT_NEAR(t.loss->scalar(), 0.7, 1e-12);
  // Same distances from the exact LP.
  oracle::Mat ind = {{0, 1}, {1, 0}};
  EXPECT_NEAR(oracle::TransportSimplex({0.8, 0.2}, {1, 0}, ind), 0.2, 1e-12);
  EXPECT_NEAR(oracle::TransportSimplex({0.5, 0.5}, {1, 0}, ind), 0.5, 1e-12);
  EXPECT_NEAR(oracle::TransportSimplex({0, 1}, {1, 0}, ind), 1.0, 1e-12);
}

TEST(ContrastiveLoss, VanishesForIdenticalViewsAndFarNegative) {
  ContrastiveTerms t = ContrastiveLoss(Row({0.6, 0.4}), Row({0.6, 0.4}), Row({0.6, 0.4}),
                                       Row({0.0, 1.0}), 0.5, 0.6, GroundCost::Indicator(2));
  EXPECT_EQ(t.loss->scalar(), 0.0);
}

TEST(ContrastiveLoss, ClampsStayInRangeAndSumHolds) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> margin(0.05, 1.5);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 2 + trial % 6;
    const double m1 = margin(rng), m2 = margin(rng);
    ContrastiveTerms t =
        ContrastiveLoss(Row(RandomDistribution(rng, k)), Row(RandomDistribution(rng, k)),
                        Row(RandomDistribution(rng, k)), Row(RandomDistribution(rng, k)), m1, m2,
                        GroundCost::Indicator(k));
    const double d2 = t.d2->scalar(), d3 = t.d3->scalar();
    EXPECT_EQ(t.d2_clamped->scalar(), std::min(m2, d2));
    EXPECT_EQ(t.d3_clamped->scalar(), std::max(0.0, m1 - d3));
    EXPECT_GE(t.d2_clamped->scalar(), 0.0);
    EXPECT_LE(t.d2_clamped->scalar(), m2);
    EXPECT_GE(t.d3_clamped->scalar(), 0.0);
    EXPECT_LE(t.d3_clamped->scalar(), m1);
    EXPECT_NEAR(t.loss->scalar(), t.d1->scalar() + t.d2_clamped->scalar() + t.d3_clamped->scalar(),
                1e-12);
    EXPECT_LE(t.loss->scalar(), t.d1->scalar() + m1 + m2 + 1e-12);
  }
}

TEST(ContrastiveLoss, NonDecreasingInM2) {
  ad::Var p0 = Row({0.7, 0.2, 0.1}), p1 = Row({0.6, 0.3, 0.1}), p2 = Row({0.1, 0.2, 0.7}),
          p3 = Row({0.2, 0.6, 0.2});
  double previous = -1.0;
  for (double m2 = 0.05; m2 <= 1.0; m2 += 0.05) {
    const double l =
        ContrastiveLoss(p0, p1, p2, p3, 1.0, m2, GroundCost::Indicator(3)).loss->scalar();
    EXPECT_GE(l, previous);
    previous = l;
  }
}

TEST(ContrastiveLoss, SaturatedHingeHasZeroGradient) {
  ad::Parameter p3("p3", testing::ToMatrix({{0.0, 1.0}}));
  ContrastiveTerms t = ContrastiveLoss(Row({1, 0}), Row({1, 0}), Row({1, 0}), ad::Leaf(p3), 0.5,
                                       0.6, GroundCost::Indicator(2));
  ad::Backward(t.loss);
  EXPECT_EQ(p3.grad.norm(), 0.0);
}

TEST(ContrastiveLoss, RejectsInvalidDistributions) {
  EXPECT_THROW(ContrastiveLoss(Row({0.7, 0.7}), Row({0.5, 0.5}), Row({0.5, 0.5}), Row({0.5, 0.5}),
                               1.0, 0.6, GroundCost::Indicator(2)),
               Error);
  EXPECT_THROW(ContrastiveLoss(Row({1, 0}), Row({1, 0}), Row({1, 0}), Row({1, 0}), 0.0, 0.6,
                               GroundCost::Indicator(2)),
               Error);
}

TEST(TotalLoss, Examples) {
  EXPECT_NEAR(TotalLoss(1.0, 2.0, 1.0, 0.7), 3.7, 1e-12);
  EXPECT_EQ(TotalLoss(1.5, 0.25, 9.0, 0.0), 1.75);
  EXPECT_EQ(TotalLoss(0.0, 0.0, 0.0, 0.7), 0.0);
  EXPECT_NEAR(TotalLoss(Row({1.0}), Row({2.0}), Row({1.0}), 0.7)->scalar(), 3.7, 1e-12);
  EXPECT_THROW(TotalLoss(1.0, 1.0, 1.0, -0.1), Error);
}

}  // namespace
}  // namespace pbct

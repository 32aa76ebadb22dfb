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

#include "pbct/trainer.h"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "pbct/status.h"
#include "test_support.h"

namespace pbct {
namespace {

class TrainerTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { data_ = new PreparedData(PrepareData(testing::SmallConfig())); }
  static void TearDownTestSuite() { delete data_; }
  static PreparedData* data_;
};
PreparedData* TrainerTest::data_ = nullptr;

TrainOptions InDir(const std::filesystem::path& dir) {
  TrainOptions o;
  o.out_dir = dir.string();
  return o;
}

void ExpectSameTrace(const std::vector<StepRecord>& a, const std::vector<StepRecord>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].step, b[i].step);
    EXPECT_EQ(a[i].loss.total, b[i].loss.total) << "step " << a[i].step;
    EXPECT_EQ(a[i].loss.l_tri, b[i].loss.l_tri);
    EXPECT_EQ(a[i].loss.l_eve, b[i].loss.l_eve);
    EXPECT_EQ(a[i].loss.l_con, b[i].loss.l_con);
    EXPECT_EQ(a[i].grad_norm, b[i].grad_norm);
  }
}

TEST_F(TrainerTest, PreparedSmokeData) {
  EXPECT_EQ(data_->catalog.num_seen(), 4u);
  EXPECT_EQ(data_->catalog.num_unseen(), 2u);
  EXPECT_FALSE(data_->train.empty());
  for (const EventMention& m : data_->train) {
    if (m.visibility == Visibility::kUnseen) {
      EXPECT_FALSE(m.label);
      EXPECT_FALSE(m.trigger);
    }
  }
}

TEST_F(TrainerTest, RunsAreDeterministic) {
  auto da = testing::TempDir("trainer_det_a"), db = testing::TempDir("trainer_det_b");
  Trainer a(testing::SmallConfig(), *data_), b(testing::SmallConfig(), *data_);
  TrainResult ra = a.Train(InDir(da)), rb = b.Train(InDir(db));
  ExpectSameTrace(ra.steps, rb.steps);
  EXPECT_EQ(testing::ReadFile(ra.final_checkpoint), testing::ReadFile(rb.final_checkpoint));
  EXPECT_EQ(testing::ReadFile(da / "metrics" / "train.jsonl"),
            testing::ReadFile(db / "metrics" / "train.jsonl"));
}

TEST_F(TrainerTest, ResumeMatchesUninterruptedRun) {
  auto full_dir = testing::TempDir("trainer_full"), part_dir = testing::TempDir("trainer_part");
  Trainer full(testing::SmallConfig(), *data_);
  TrainResult whole = full.Train(InDir(full_dir));

  Trainer first(testing::SmallConfig(), *data_);
  TrainOptions stop = InDir(part_dir);
  stop.stop_after_step = 3;
  TrainResult head = first.Train(stop);
  ASSERT_EQ(head.steps.size(), 3u);
  EXPECT_NE(head.final_checkpoint.find("step_3.ckpt"), std::string::npos);

  Trainer resumed(LoadCheckpoint(head.final_checkpoint), *data_);
  EXPECT_EQ(resumed.progress().step, 3);
  TrainResult tail = resumed.Train(InDir(part_dir));
  std::vector<StepRecord> joined = head.steps;
  joined.insert(joined.end(), tail.steps.begin(), tail.steps.end());
  ExpectSameTrace(joined, whole.steps);
  EXPECT_EQ(testing::ReadFile(tail.final_checkpoint), testing::ReadFile(whole.final_checkpoint));
}

TEST_F(TrainerTest, ZeroLambdaEqualsDisabledContrastive) {
  RunConfig zero = testing::SmallConfig();
  zero.lambda = 0.0;
  RunConfig off = testing::SmallConfig();
  off.disable_contrastive = true;
  Trainer a(zero, *data_), b(off, *data_);
  TrainResult ra = a.Train(), rb = b.Train();
  ExpectSameTrace(ra.steps, rb.steps);
  for (const StepRecord& r : ra.steps) {
    EXPECT_EQ(r.loss.l_con, 0.0);
    // Unseen prototypes only receive gradient through the contrastive term.
    EXPECT_EQ(r.unseen_prototype_grad_norm, 0.0);
  }
}

TEST_F(TrainerTest, ContrastiveTermReachesUnseenPrototypes) {
  Trainer t(testing::SmallConfig(), *data_);
  double total = 0.0;
  for (int i = 0; i < 3; ++i) total += t.Step().unseen_prototype_grad_norm;
  EXPECT_GT(total, 0.0);
}

TEST_F(TrainerTest, GateStartsEvenAndIsLogged) {
  Trainer t(testing::SmallConfig(), *data_);
  StepRecord first = t.Step();
  ASSERT_TRUE(first.g1_mean);
  EXPECT_NEAR(*first.g1_mean, 0.5, 1e-12);
  EXPECT_EQ(first.seen_in_batch + first.unseen_in_batch, 4);
  EXPECT_TRUE(StepRecordToJson(first).contains("g1_mean"));

  RunConfig c = testing::SmallConfig();
  c.disable_sentinel = true;
  Trainer off(c, *data_);
  StepRecord r = off.Step();
  EXPECT_FALSE(r.g1_mean);
  EXPECT_FALSE(StepRecordToJson(r).contains("g1_mean"));
}

TEST_F(TrainerTest, InitializationModes) {
  auto semantic = InitializeModel(testing::SmallConfig(), *data_);
  EXPECT_TRUE(semantic->prototypes().value ==
              EncodeLabels(semantic->encoder(), semantic->catalog().labels()).rows);
  RunConfig c = testing::SmallConfig();
  c.disable_semantic_init = true;
  auto gaussian = InitializeModel(c, *data_);
  const ad::Matrix& p = gaussian->prototypes().value;
  const double sd = std::sqrt((p.array() - p.mean()).square().mean());
  EXPECT_NEAR(sd, 0.02, 0.005);
  EXPECT_EQ(gaussian->sentinel().weight().value.norm(), 0.0);
}

TEST_F(TrainerTest, BatchesCoverEachEpochOnce) {
  RunConfig c = testing::SmallConfig();
  Trainer t(c, *data_);
  const int64_t per_epoch = t.StepsPerEpoch();
  ASSERT_GT(per_epoch, 1);
  std::multiset<std::string> seen_ids;
  for (int64_t s = 0; s < per_epoch; ++s) {
    for (const std::string& id : t.BatchIds(s)) seen_ids.insert(id);
  }
  std::set<std::string> unique(seen_ids.begin(), seen_ids.end());
  EXPECT_EQ(unique.size(), seen_ids.size());
  EXPECT_GE(seen_ids.size() + static_cast<size_t>(c.batch_size), data_->train.size());
  EXPECT_EQ(t.BatchIds(3), t.BatchIds(3));
  EXPECT_NE(t.BatchIds(0), t.BatchIds(per_epoch));
}

TEST_F(TrainerTest, GoldIsUnreachableDuringSteps) {
  Trainer t(testing::SmallConfig(), *data_);
  TrainOptions o;
  o.stop_after_step = 1;
  bool checked = false;
  std::string unseen_id;
  for (const EventMention& m : data_->train) {
    if (m.visibility == Visibility::kUnseen) unseen_id = m.id;
  }
  ASSERT_FALSE(unseen_id.empty());
  EXPECT_NO_THROW(data_->gold.Gold(unseen_id));
  o.hooks.on_step = [&](const StepRecord&) {
    // Hooks run after the step's scope closes; reopening it blocks reads.
    TrainingScope scope;
    EXPECT_THROW(data_->gold.Gold(unseen_id), LeakageError);
    checked = true;
  };
  t.Train(o);
  EXPECT_TRUE(checked);
}

TEST_F(TrainerTest, NonFiniteLossHalts) {
  Trainer t(testing::SmallConfig(), *data_);
  t.model().prototypes().value(0, 0) = std::nan("");
  try {
    t.Step();
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("step 1"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("batch ids"), std::string::npos) << e.what();
  }
}

TEST_F(TrainerTest, EvaluateReportsAllMetrics) {
  Trainer t(testing::SmallConfig(), *data_);
  MetricsReport r = t.Evaluate(data_->test);
  EXPECT_TRUE(r.f1_seen);
  EXPECT_TRUE(r.f1_unseen);
  EXPECT_TRUE(r.nmi);
  EXPECT_TRUE(r.fm);
  {
    TrainingScope scope;
    EXPECT_THROW(t.Evaluate(data_->test), LeakageError);
  }
}

TEST(TrainerSmoke, WindowedLossDecreases) {
  const RunConfig config = Preset("toy");
  PreparedData data = PrepareData(config);
  Trainer t(config, data);
  TrainResult r = t.Train();
  ASSERT_EQ(r.steps.size(), 200u);
  // Means over consecutive 50-step windows.
  std::vector<double> windows(4, 0.0);
  for (size_t i = 0; i < r.steps.size(); ++i) windows[i / 50] += r.steps[i].loss.total / 50.0;
  for (size_t w = 1; w < windows.size(); ++w) {
    EXPECT_LT(windows[w], windows[w - 1]) << "window " << w;
  }
}

}  // namespace
}  // namespace pbct

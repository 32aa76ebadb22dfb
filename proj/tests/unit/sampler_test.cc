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

#include "pbct/sampler.h"

#include <gtest/gtest.h>

#include <map>
#include <stdexcept>

#include "pbct/status.h"
#include "test_support.h"

namespace pbct {
namespace {

using testing::Mention;

EventMention Unseen(EventMention m) {
  m.visibility = Visibility::kUnseen;
  m.label.reset();
  m.trigger.reset();
  return m;
}

TEST(Rephrase, IdentityStubKeepsMention) {
  EventMention m = Mention("m", "He quit.", "quit", "End-Position");
  RephraseResult r = Rephrase(m, IdentityParaphraser(), "quit");
  EXPECT_FALSE(r.fallback);
  EXPECT_EQ(r.mention, m);
}

TEST(Rephrase, CachedTableAcceptsPreservedTrigger) {
  CachedParaphraser table({{"He quit.", "He quit the post."},
                           {"He resigned.", "He stepped down."},
                           {"They wed.", "They were quitting."}});
  EventMention m = Mention("m", "He quit.", "quit", "End-Position");
  RephraseResult ok = Rephrase(m, table, "quit");
  EXPECT_FALSE(ok.fallback);
  EXPECT_EQ(ok.mention.text, "He quit the post.");
  EXPECT_EQ(ok.mention.TriggerText(), "quit");

  EventMention r = Mention("r", "He resigned.", "resigned", "End-Position");
  RephraseResult dropped = Rephrase(r, table, "resigned");
  EXPECT_TRUE(dropped.fallback);
  EXPECT_EQ(dropped.mention, r);

  // Whole-word match: "quitting" does not preserve "quit".
  EventMention w = Mention("w", "They wed.", "wed", "Marry");
  EXPECT_TRUE(Rephrase(w, table, "quit").fallback);

  EventMention missing = Mention("x", "Nothing here.", "Nothing", "Marry");
  RephraseResult none = Rephrase(missing, table, "Nothing");
  EXPECT_TRUE(none.fallback);
  EXPECT_EQ(none.reason, "no paraphrase available");
}

TEST(Rephrase, CaseInsensitiveReanchor) {
  CachedParaphraser table(
      std::map<std::string, std::string>{{"troops raid the village", "A RAID hit the village"}});
  RephraseResult r =
      Rephrase(Mention("m", "troops raid the village", "raid", "Attack"), table, "raid");
  EXPECT_FALSE(r.fallback);
  EXPECT_EQ(r.mention.TriggerText(), "RAID");
}

TEST(Rephrase, EmptyTextIsRejected) {
  EventMention m = Mention("e", "   ", "", std::nullopt);
  EXPECT_THROW(Rephrase(m, IdentityParaphraser(), ""), ConfigError);
}

TEST(Rephrase, ExternalCommandAndFailure) {
  EventMention m = Mention("m", "He quit.", "quit", "End-Position");
  RephraseResult up = Rephrase(m, ExternalParaphraser("tr a-z A-Z"), "quit");
  EXPECT_FALSE(up.fallback);
  EXPECT_EQ(up.mention.text, "HE QUIT.");
  EXPECT_TRUE(Rephrase(m, ExternalParaphraser("exit 3"), "quit").fallback);
}

class ThrowingParaphraser : public ParaphraseProvider {
 public:
  explicit ThrowingParaphraser(bool leak) : leak_(leak) {}
  ParaphraseMode mode() const override { return ParaphraseMode::kCachedTable; }
  std::optional<std::string> Paraphrase(const std::string&) const override {
    if (leak_) throw LeakageError("gold read");
    throw std::runtime_error("service down");
  }

 private:
  bool leak_;
};

TEST(Rephrase, ProviderFailureFallsBackButLeakagePropagates) {
  EventMention m = Mention("m", "He quit.", "quit", "End-Position");
  RephraseResult r = Rephrase(m, ThrowingParaphraser(false), "quit");
  EXPECT_TRUE(r.fallback);
  EXPECT_NE(r.reason.find("service down"), std::string::npos);
  EXPECT_THROW(Rephrase(m, ThrowingParaphraser(true), "quit"), LeakageError);
}

TEST(ParaphraseTable, FileRoundTrip) {
  auto dir = testing::TempDir("paraphrases");
  std::map<std::string, std::string> t = {{"a b", "b a"}, {"Zoë quit", "Zoë left"}};
  WriteParaphraseTable((dir / "p.jsonl").string(), t);
  auto back = CachedParaphraser::FromFile((dir / "p.jsonl").string());
  EXPECT_EQ(back->size(), 2u);
  EXPECT_EQ(back->Paraphrase("Zoë quit"), "Zoë left");
  EXPECT_THROW(CachedParaphraser::FromFile((dir / "absent.jsonl").string()), Error);
}

TEST(ParaphraseMode, NamesRoundTrip) {
  for (ParaphraseMode m : {ParaphraseMode::kIdentityStub, ParaphraseMode::kCachedTable,
                           ParaphraseMode::kExternalBacktranslation}) {
    EXPECT_EQ(ParseParaphraseMode(ParaphraseModeName(m)), m);
  }
  EXPECT_THROW(ParseParaphraseMode("google"), ConfigError);
}

TEST(MaskTrigger, Examples) {
  EventMention m = Mention("m", "He quit the post.", "quit", "End-Position");
  EventMention g = MaskTrigger(m, TriggerSource::kGold);
  EXPECT_EQ(g.text, "He [MASK] the post.");
  EXPECT_EQ(g.TriggerText(), "[MASK]");
  EventMention p = MaskTrigger(m, TriggerSource::kPredicted, TriggerSpan{12, 16});
  EXPECT_EQ(p.text, "He quit the [MASK].");
  EventMention whole =
      MaskTrigger(Mention("d", "Married.", "Married", "Marry"), TriggerSource::kGold);
  EXPECT_EQ(whole.text, "[MASK].");
  EventMention u = MaskTrigger(Mention("u", "Zoë quit.", "quit", "X"), TriggerSource::kGold);
  EXPECT_EQ(u.text, "Zoë [MASK].");
}

TEST(MaskTrigger, Errors) {
  EventMention unlabeled = Unseen(Mention("u", "He quit.", "quit", "X"));
  EXPECT_THROW(MaskTrigger(unlabeled, TriggerSource::kGold), ConfigError);
  EXPECT_THROW(MaskTrigger(unlabeled, TriggerSource::kPredicted), ConfigError);
  EXPECT_THROW(MaskTrigger(unlabeled, TriggerSource::kPredicted, TriggerSpan{5, 40}), ConfigError);
}

std::vector<EventMention> Pool() {
  std::vector<EventMention> pool;
  for (int i = 0; i < 3; ++i)
    pool.push_back(Mention("a" + std::to_string(i), "they wed", "wed", "A"));
  for (int i = 0; i < 4; ++i)
    pool.push_back(Mention("b" + std::to_string(i), "he quit", "quit", "B"));
  for (int i = 0; i < 5; ++i)
    pool.push_back(Unseen(Mention("u" + std::to_string(i), "troops raid", "raid", "C")));
  return pool;
}

TEST(SampleNegative, SeenOriginalExcludesItsLabelUniformly) {
  std::vector<EventMention> pool = Pool();
  NegativePool negatives(pool);
  std::map<std::string, int> counts;
  const int draws = 9000;
  for (int s = 0; s < draws; ++s) counts[negatives.Draw(pool[0], s).id]++;
  EXPECT_EQ(counts.size(), 9u);  // 4 other-label seen plus 5 unseen
  double chi2 = 0.0;
  for (const auto& [id, c] : counts) {
    EXPECT_NE(id[0], 'a');
    chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
  }
  EXPECT_LT(chi2, 26.12);  // chi-square, 8 dof, p = 0.001
}

TEST(SampleNegative, UnseenOriginalDrawsSeenOnly) {
  std::vector<EventMention> pool = Pool();
  std::map<std::string, int> counts;
  for (int s = 0; s < 7000; ++s) counts[SampleNegative(pool.back(), pool, s).id]++;
  EXPECT_EQ(counts.size(), 7u);
  double chi2 = 0.0;
  for (const auto& [id, c] : counts) {
    EXPECT_NE(id[0], 'u');
    chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
  }
  EXPECT_LT(chi2, 22.46);  // 6 dof, p = 0.001
}

TEST(SampleNegative, DeterministicAndFailsWithoutCandidates) {
  std::vector<EventMention> pool = Pool();
  EXPECT_EQ(&SampleNegative(pool[4], pool, 17), &SampleNegative(pool[4], pool, 17));
  std::vector<EventMention> only_a(pool.begin(), pool.begin() + 3);
  EXPECT_THROW(SampleNegative(only_a[0], only_a, 1), ConfigError);
  std::vector<EventMention> only_unseen(pool.begin() + 7, pool.end());
  EXPECT_THROW(SampleNegative(only_unseen[0], only_unseen, 1), ConfigError);
}

class BundleTest : public ::testing::Test {
 protected:
  void SetUp() override {
    EventTypeCatalog c({"Marry", "End-Position", "Attack"}, {3, 3, 3});
    c.SetPartition(2);
    std::vector<std::string> texts = {"Married .", "He quit the post .", "troops raid it",
                                      "Marry",     "End-Position",       "Attack"};
    ToyEncoderOptions o;
    o.seed = 3;
    model_ = std::make_unique<PbctModel>(MakeToyEncoder(texts, o), c, ModelOptions{});
    model_->InitializePrototypes(true, 3);
    pool_ = {Mention("s0", "Married.", "Married", "Marry"),
             Mention("s1", "He quit the post.", "quit", "End-Position"),
             Unseen(Mention("u0", "troops raid it", "raid", "Attack"))};
  }
  std::unique_ptr<PbctModel> model_;
  std::vector<EventMention> pool_;
};

TEST_F(BundleTest, IdentityParaphraseReproducesOriginal) {
  NegativePool negatives(pool_);
  ad::NoGradGuard no_grad;
  ContrastiveBundle b = BuildBundle(pool_[1], IdentityParaphraser(), negatives, *model_, 5);
  EXPECT_FALSE(b.rephrase_fallback);
  EXPECT_TRUE(b.p1()->value() == b.p0()->value());
  EXPECT_EQ(b.masked.text, "He [MASK] the post.");
  EXPECT_NE(b.negative.label.value_or(""), "End-Position");
  EXPECT_EQ(b.p0()->cols(), 3);
  EXPECT_EQ(b.p3()->cols(), 3);
}

TEST_F(BundleTest, DegenerateSingleWordMention) {
  NegativePool negatives(pool_);
  ad::NoGradGuard no_grad;
  ContrastiveBundle b = BuildBundle(pool_[0], IdentityParaphraser(), negatives, *model_, 6);
  EXPECT_EQ(b.masked.text, "[MASK].");
  EXPECT_TRUE(b.p2()->value().allFinite());
  EXPECT_NEAR(b.p2()->value().sum(), 1.0, 1e-12);
}

TEST_F(BundleTest, UnseenMentionMasksPredictedTrigger) {
  NegativePool negatives(pool_);
  ad::NoGradGuard no_grad;
  ContrastiveBundle b = BuildBundle(pool_[2], IdentityParaphraser(), negatives, *model_, 7);
  const TriggerSpan span = b.out0.trigger.best_word_span;
  EXPECT_EQ(b.masked.text, MaskTrigger(pool_[2], TriggerSource::kPredicted, span).text);
  EXPECT_EQ(b.negative.visibility, Visibility::kSeen);
  // Supplying the original forward gives the same bundle.
  ContrastiveBundle again =
      BuildBundle(pool_[2], IdentityParaphraser(), negatives, *model_, 7, b.out0);
  EXPECT_TRUE(again.p2()->value() == b.p2()->value());
  EXPECT_TRUE(again.p3()->value() == b.p3()->value());
}

}  // namespace
}  // namespace pbct

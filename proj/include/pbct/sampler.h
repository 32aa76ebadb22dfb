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

// Contrastive sample construction: paraphrased positives, trigger-masked
// positives and negatives.

#ifndef PBCT_SAMPLER_H_
#define PBCT_SAMPLER_H_

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pbct/corpus.h"
#include "pbct/model.h"

namespace pbct {

enum class ParaphraseMode { kIdentityStub, kCachedTable, kExternalBacktranslation };

ParaphraseMode ParseParaphraseMode(std::string_view name);
std::string_view ParaphraseModeName(ParaphraseMode mode);

class ParaphraseProvider {
 public:
  virtual ~ParaphraseProvider() = default;
  virtual ParaphraseMode mode() const = 0;
  // nullopt when the provider has no output for `text`.
  virtual std::optional<std::string> Paraphrase(const std::string& text) const = 0;
};

class IdentityParaphraser : public ParaphraseProvider {
 public:
  ParaphraseMode mode() const override { return ParaphraseMode::kIdentityStub; }
  std::optional<std::string> Paraphrase(const std::string& text) const override { return text; }
};

// Lookup table of original -> paraphrase. Missing entries yield nullopt.
class CachedParaphraser : public ParaphraseProvider {
 public:
  explicit CachedParaphraser(std::map<std::string, std::string> table) : table_(std::move(table)) {}
  // One JSON object per line: {"original": ..., "paraphrase": ...}.
  static std::unique_ptr<CachedParaphraser> FromFile(const std::string& path);

  ParaphraseMode mode() const override { return ParaphraseMode::kCachedTable; }
  std::optional<std::string> Paraphrase(const std::string& text) const override;
  size_t size() const { return table_.size(); }

 private:
  std::map<std::string, std::string> table_;
};

// Runs `command` with the text on stdin and reads one line from stdout,
// for offline round-trip translation tools.
class ExternalParaphraser : public ParaphraseProvider {
 public:
  explicit ExternalParaphraser(std::string command) : command_(std::move(command)) {}
  ParaphraseMode mode() const override { return ParaphraseMode::kExternalBacktranslation; }
  std::optional<std::string> Paraphrase(const std::string& text) const override;

 private:
  std::string command_;
};

void WriteParaphraseTable(const std::string& path, const std::map<std::string, std::string>& table);

struct RephraseResult {
  EventMention mention;
  bool fallback = false;  // original text kept
  std::string reason;
};

// The provider output when `trigger_word` survives as a whole word
// (case-insensitive); the original otherwise. Trigger spans are re-anchored
// in the new text.
RephraseResult Rephrase(const EventMention& mention, const ParaphraseProvider& provider,
                        const std::string& trigger_word);

enum class TriggerSource { kGold, kPredicted };

// Replaces the trigger word by a single "[MASK]". Gold mode uses the
// mention's span; predicted mode uses `predicted` (code points).
EventMention MaskTrigger(const EventMention& mention, TriggerSource source,
                         std::optional<TriggerSpan> predicted = std::nullopt);

// Seen original: uniform over seen mentions of another label plus all
// unseen mentions. Unseen original: uniform over seen mentions.
const EventMention& SampleNegative(const EventMention& original, std::span<const EventMention> pool,
                                   uint64_t seed);

// Index-based pools for repeated draws over a fixed training view.
class NegativePool {
 public:
  explicit NegativePool(std::span<const EventMention> pool);
  const EventMention& Draw(const EventMention& original, uint64_t seed) const;

 private:
  std::span<const EventMention> pool_;
  std::vector<int> seen_;
  std::vector<int> unseen_;
  std::map<std::string, std::vector<int>, std::less<>> seen_by_label_;
};

struct ContrastiveBundle {
  EventMention original;
  EventMention rephrased;
  EventMention masked;
  EventMention negative;
  bool rephrase_fallback = false;
  ViewOutput out0, out1, out2, out3;

  const ad::Var& p0() const { return out0.classification.probs; }
  const ad::Var& p1() const { return out1.classification.probs; }
  const ad::Var& p2() const { return out2.classification.probs; }
  const ad::Var& p3() const { return out3.classification.probs; }
};

// Forwards the original first; its trigger prediction masks unseen
// mentions. All four views are classified over every type. When
// `original_out` is supplied the original is not forwarded again.
ContrastiveBundle BuildBundle(const EventMention& mention, const ParaphraseProvider& provider,
                              const NegativePool& pool, const PbctModel& model, uint64_t seed,
                              std::optional<ViewOutput> original_out = std::nullopt);

}  // namespace pbct

#endif  // PBCT_SAMPLER_H_

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

// Event mention corpus: ingestion, seen/unseen partitioning, stratified
// splitting and annotation masking.
//
// Trigger spans are code point offsets [start, end) into the mention text.

#ifndef PBCT_CORPUS_H_
#define PBCT_CORPUS_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pbct {

enum class Visibility { kSeen, kUnseen };

std::string_view VisibilityName(Visibility v);

struct TriggerSpan {
  size_t start = 0;
  size_t end = 0;

  bool operator==(const TriggerSpan&) const = default;
};

struct EventMention {
  std::string id;
  std::string text;
  std::optional<TriggerSpan> trigger;
  std::optional<std::string> label;
  Visibility visibility = Visibility::kSeen;

  // Surface text of the trigger span; empty when no trigger.
  std::string TriggerText() const;

  bool operator==(const EventMention&) const = default;
};

// Type labels with per-type sample counts. After Partition() the labels are
// reordered so that seen types come first, each group in rank order.
class EventTypeCatalog {
 public:
  EventTypeCatalog() = default;
  EventTypeCatalog(std::vector<std::string> labels, std::vector<int64_t> counts);

  size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<int64_t>& counts() const { return counts_; }
  const std::string& label(size_t i) const { return labels_.at(i); }
  int64_t count(size_t i) const { return counts_.at(i); }
  int64_t total_count() const;

  // Index of `label` or -1.
  int IndexOf(std::string_view label) const;

  bool partitioned() const { return partitioned_; }
  const std::vector<int>& seen() const { return seen_; }
  const std::vector<int>& unseen() const { return unseen_; }
  size_t num_seen() const { return seen_.size(); }
  size_t num_unseen() const { return unseen_.size(); }
  bool IsSeen(int index) const;
  bool IsSeenLabel(std::string_view label) const;

  // Installs an explicit partition; labels must already be seen-first.
  void SetPartition(size_t num_seen);

  bool operator==(const EventTypeCatalog&) const = default;

 private:
  std::vector<std::string> labels_;
  std::vector<int64_t> counts_;
  std::vector<int> seen_;
  std::vector<int> unseen_;
  bool partitioned_ = false;
  std::map<std::string, int, std::less<>> index_;
};

// Builds the catalog from mention label frequencies, labels sorted
// lexicographically. Mentions without a label are not counted.
EventTypeCatalog CatalogFromMentions(std::span<const EventMention> mentions);

enum class CorpusFormat {
  kJsonl,     // canonical: one record per line
  kFewEvent,  // object of label -> instance list
};

CorpusFormat ParseCorpusFormat(std::string_view name);

struct LoadedCorpus {
  std::vector<EventMention> mentions;
  EventTypeCatalog catalog;
};

LoadedCorpus LoadCorpus(const std::string& path, CorpusFormat format);
LoadedCorpus ParseJsonlCorpus(std::string_view content);
LoadedCorpus ParseFewEventCorpus(std::string_view content);

// Writes the canonical line-delimited format.
void WriteCorpus(const std::string& path, std::span<const EventMention> mentions);
std::string SerializeCorpus(std::span<const EventMention> mentions);

// Ranks types by count descending (ties: label ascending); odd ranks become
// seen, even ranks unseen. The result lists seen types first.
EventTypeCatalog PartitionTypes(const EventTypeCatalog& catalog);

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::vector<std::string> warnings;
};

// Stratified per type. Validation and test quotas are the ratio times the
// type size rounded half up; train takes the rest. Types with fewer than
// three instances go entirely to train.
DatasetSplit SplitDataset(std::span<const EventMention> mentions, const EventTypeCatalog& catalog,
                          const SplitRatios& ratios, uint64_t seed);

struct SplitProvenance {
  uint64_t seed = 0;
  SplitRatios ratios;
  std::string tool_version;
};

void WriteSplitManifest(const std::string& dir, const DatasetSplit& split,
                        const SplitProvenance& provenance);
DatasetSplit ReadSplitManifest(const std::string& dir, SplitProvenance* provenance = nullptr);

// Marks training as active on this thread while alive. Gold annotations
// of unseen types cannot be read inside a training scope.
class TrainingScope {
 public:
  TrainingScope();
  ~TrainingScope();
  TrainingScope(const TrainingScope&) = delete;
  TrainingScope& operator=(const TrainingScope&) = delete;

  static bool Active();
};

// Original annotations of masked mentions, reachable only outside training.
class GoldStore {
 public:
  void Put(const EventMention& original);
  bool Contains(std::string_view id) const;
  size_t size() const { return gold_.size(); }

  // Throws LeakageError inside a TrainingScope.
  const EventMention& Gold(std::string_view id) const;

  // The view with every masked mention restored to its gold annotation.
  std::vector<EventMention> Restore(std::span<const EventMention> view) const;

 private:
  std::map<std::string, EventMention, std::less<>> gold_;
};

struct MaskedCorpus {
  std::vector<EventMention> view;
  GoldStore gold;
};

// Assigns visibility from the catalog partition and strips trigger and
// label from every mention that is not of a seen type.
MaskedCorpus MaskUnseenAnnotations(std::span<const EventMention> mentions,
                                   const EventTypeCatalog& catalog);

// Selects mentions by id in id-list order.
std::vector<EventMention> SelectMentions(std::span<const EventMention> all,
                                         std::span<const std::string> ids);

}  // namespace pbct

#endif  // PBCT_CORPUS_H_

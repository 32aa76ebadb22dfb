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

#include "pbct/corpus.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pbct/seed.h"
#include "pbct/status.h"
#include "pbct/utf8.h"

namespace pbct {
namespace {

using json = nlohmann::json;

thread_local int training_depth = 0;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ValidateTrigger(const EventMention& m) {
  if (!m.trigger) return;
  size_t len = utf8::CodepointCount(m.text);
  const TriggerSpan& t = *m.trigger;
  if (!(t.start < t.end && t.end <= len)) {
    throw FormatError("mention " + m.id + ": trigger span [" + std::to_string(t.start) + "," +
                      std::to_string(t.end) + ") outside text of length " + std::to_string(len));
  }
  if (utf8::Trim(m.TriggerText()).empty()) {
    throw FormatError("mention " + m.id + ": trigger span is whitespace");
  }
}

int64_t RoundHalfUp(double x) { return static_cast<int64_t>(std::floor(x + 0.5 + 1e-9)); }

EventMention FewEventInstance(const json& inst, const std::string& label, size_t index) {
  EventMention m;
  m.id = "fewevent-" + label + "-" + std::to_string(index);
  m.label = label;
  json sentence;
  json trigger;
  json position;
  if (inst.is_object()) {
    sentence = inst.contains("text") ? inst["text"] : inst.value("sentence", json());
    trigger = inst.value("trigger", json());
    if (inst.contains("position")) position = inst["position"];
  } else if (inst.is_array() && inst.size() >= 2) {
    sentence = inst[0];
    trigger = inst[1];
    if (inst.size() >= 3) position = inst[2];
  } else {
    throw FormatError("fewevent: instance " + m.id + " has unknown layout");
  }
  std::vector<std::string> tokens;
  if (sentence.is_string()) {
    m.text = sentence.get<std::string>();
  } else if (sentence.is_array()) {
    for (const json& t : sentence) tokens.push_back(t.get<std::string>());
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (i) m.text += ' ';
      m.text += tokens[i];
    }
  } else {
    throw FormatError("fewevent: instance " + m.id + " has no sentence");
  }
  if (!trigger.is_string()) {
    throw FormatError("fewevent: instance " + m.id + " has no trigger word");
  }
  std::string word = trigger.get<std::string>();
  size_t byte = std::string::npos;
  // A token position, when given, disambiguates repeated trigger words.
  if (!tokens.empty() &&
      (position.is_number_integer() ||
       (position.is_array() && !position.empty() && position[0].is_number_integer()))) {
    size_t tok = position.is_array() ? position[0].get<size_t>() : position.get<size_t>();
    if (tok < tokens.size()) {
      size_t at = 0;
      for (size_t i = 0; i < tok; ++i) at += tokens[i].size() + 1;
      if (utf8::AsciiLower(m.text.substr(at, word.size())) == utf8::AsciiLower(word)) {
        byte = at;
      }
    }
  }
  if (byte == std::string::npos) byte = utf8::FindWord(m.text, word);
  if (byte == std::string::npos) {
    throw FormatError("fewevent: trigger '" + word + "' not found in " + m.id);
  }
  std::vector<size_t> b2c = utf8::ByteToCodepoint(m.text);
  m.trigger = TriggerSpan{b2c[byte], b2c[byte + word.size()]};
  return m;
}

}  // namespace

std::string_view VisibilityName(Visibility v) { return v == Visibility::kSeen ? "seen" : "unseen"; }

std::string EventMention::TriggerText() const {
  if (!trigger) return "";
  return utf8::Substr(text, trigger->start, trigger->end);
}

EventTypeCatalog::EventTypeCatalog(std::vector<std::string> labels, std::vector<int64_t> counts)
    : labels_(std::move(labels)), counts_(std::move(counts)) {
  if (labels_.size() != counts_.size()) {
    throw ConfigError("catalog: labels and counts differ in length");
  }
  for (size_t i = 0; i < labels_.size(); ++i) {
    if (counts_[i] < 0) throw ConfigError("catalog: negative count");
    if (!index_.emplace(labels_[i], static_cast<int>(i)).second) {
      throw ConfigError("catalog: duplicate label " + labels_[i]);
    }
  }
}

int64_t EventTypeCatalog::total_count() const {
  return std::accumulate(counts_.begin(), counts_.end(), int64_t{0});
}

int EventTypeCatalog::IndexOf(std::string_view label) const {
  auto it = index_.find(label);
  return it == index_.end() ? -1 : it->second;
}

bool EventTypeCatalog::IsSeen(int index) const {
  return partitioned_ && index >= 0 && static_cast<size_t>(index) < seen_.size();
}

bool EventTypeCatalog::IsSeenLabel(std::string_view label) const { return IsSeen(IndexOf(label)); }

void EventTypeCatalog::SetPartition(size_t num_seen) {
  if (num_seen > labels_.size()) throw ConfigError("catalog: bad partition");
  seen_.clear();
  unseen_.clear();
  for (size_t i = 0; i < labels_.size(); ++i) {
    (i < num_seen ? seen_ : unseen_).push_back(static_cast<int>(i));
  }
  partitioned_ = true;
}

EventTypeCatalog CatalogFromMentions(std::span<const EventMention> mentions) {
  std::map<std::string, int64_t> freq;
  for (const EventMention& m : mentions) {
    if (m.label) ++freq[*m.label];
  }
  std::vector<std::string> labels;
  std::vector<int64_t> counts;
  for (const auto& [label, n] : freq) {
    labels.push_back(label);
    counts.push_back(n);
  }
  return EventTypeCatalog(std::move(labels), std::move(counts));
}

CorpusFormat ParseCorpusFormat(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::kJsonl;
  if (name == "fewevent") return CorpusFormat::kFewEvent;
  throw ConfigError("unknown corpus format: " + std::string(name));
}

LoadedCorpus ParseJsonlCorpus(std::string_view content) {
  static const std::set<std::string> kFields = {"id", "text", "trigger_start", "trigger_end",
                                                "label"};
  LoadedCorpus out;
  std::set<std::string> ids;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= content.size()) {
    size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (utf8::Trim(line).empty()) {
      if (nl == content.size()) break;
      continue;
    }
    std::string where = "line " + std::to_string(line_no);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(where + ": malformed record: " + e.what());
    }
    if (!rec.is_object()) throw FormatError(where + ": record is not an object");
    for (const auto& [key, _] : rec.items()) {
      if (!kFields.count(key)) {
        throw FormatError(where + ": unknown field '" + key + "'");
      }
    }
    if (!rec.contains("id") || !rec["id"].is_string() || !rec.contains("text") ||
        !rec["text"].is_string()) {
      throw FormatError(where + ": id and text must be strings");
    }
    EventMention m;
    m.id = rec["id"].get<std::string>();
    m.text = rec["text"].get<std::string>();
    bool has_start = rec.contains("trigger_start");
    bool has_end = rec.contains("trigger_end");
    if (has_start != has_end) {
      throw FormatError(where + ": trigger_start and trigger_end go together");
    }
    if (has_start) {
      const json& s = rec["trigger_start"];
      const json& e = rec["trigger_end"];
      if (!s.is_number_integer() || !e.is_number_integer() || s.get<int64_t>() < 0 ||
          e.get<int64_t>() < 0) {
        throw FormatError("mention " + m.id + ": trigger offsets must be non-negative integers");
      }
      m.trigger = TriggerSpan{s.get<size_t>(), e.get<size_t>()};
    }
    if (rec.contains("label")) {
      if (!rec["label"].is_string()) {
        throw FormatError(where + ": label must be a string");
      }
      m.label = rec["label"].get<std::string>();
    }
    ValidateTrigger(m);
    if (!ids.insert(m.id).second) {
      throw FormatError(where + ": duplicate id " + m.id);
    }
    out.mentions.push_back(std::move(m));
    if (nl == content.size()) break;
  }
  out.catalog = CatalogFromMentions(out.mentions);
  return out;
}

LoadedCorpus ParseFewEventCorpus(std::string_view content) {
  LoadedCorpus out;
  if (utf8::Trim(content).empty()) return out;
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::exception& e) {
    throw FormatError(std::string("fewevent: malformed document: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("fewevent: expected an object");
  for (const auto& [label, instances] : doc.items()) {
    if (!instances.is_array()) {
      throw FormatError("fewevent: type " + label + " is not a list");
    }
    for (size_t i = 0; i < instances.size(); ++i) {
      EventMention m = FewEventInstance(instances[i], label, i);
      ValidateTrigger(m);
      out.mentions.push_back(std::move(m));
    }
  }
  out.catalog = CatalogFromMentions(out.mentions);
  return out;
}

LoadedCorpus LoadCorpus(const std::string& path, CorpusFormat format) {
  std::string content = ReadFile(path);
  return format == CorpusFormat::kJsonl ? ParseJsonlCorpus(content) : ParseFewEventCorpus(content);
}

std::string SerializeCorpus(std::span<const EventMention> mentions) {
  std::string out;
  for (const EventMention& m : mentions) {
    json rec;
    rec["id"] = m.id;
    rec["text"] = m.text;
    if (m.trigger) {
      rec["trigger_start"] = m.trigger->start;
      rec["trigger_end"] = m.trigger->end;
    }
    if (m.label) rec["label"] = *m.label;
    out += rec.dump();
    out += '\n';
  }
  return out;
}

void WriteCorpus(const std::string& path, std::span<const EventMention> mentions) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write " + path);
  os << SerializeCorpus(mentions);
}

EventTypeCatalog PartitionTypes(const EventTypeCatalog& catalog) {
  std::vector<size_t> order(catalog.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (catalog.count(a) != catalog.count(b)) {
      return catalog.count(a) > catalog.count(b);
    }
    return catalog.label(a) < catalog.label(b);
  });
  std::vector<std::string> labels;
  std::vector<int64_t> counts;
  // Rank 1, 3, 5, ... (0-based even positions) are seen.
  for (size_t r = 0; r < order.size(); r += 2) {
    labels.push_back(catalog.label(order[r]));
    counts.push_back(catalog.count(order[r]));
  }
  size_t num_seen = labels.size();
  for (size_t r = 1; r < order.size(); r += 2) {
    labels.push_back(catalog.label(order[r]));
    counts.push_back(catalog.count(order[r]));
  }
  EventTypeCatalog out(std::move(labels), std::move(counts));
  out.SetPartition(num_seen);
  return out;
}

DatasetSplit SplitDataset(std::span<const EventMention> mentions, const EventTypeCatalog& catalog,
                          const SplitRatios& ratios, uint64_t seed) {
  double sum = ratios.train + ratios.validation + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9 || ratios.train < 0 || ratios.validation < 0 || ratios.test < 0) {
    throw ConfigError("split ratios must be non-negative and sum to 1");
  }
  // Strata in catalog order, then one stratum for unlabeled mentions.
  std::vector<std::vector<size_t>> strata(catalog.size() + 1);
  for (size_t i = 0; i < mentions.size(); ++i) {
    int t = mentions[i].label ? catalog.IndexOf(*mentions[i].label) : -1;
    if (mentions[i].label && t < 0) {
      throw ConfigError("mention " + mentions[i].id + ": label " + *mentions[i].label +
                        " not in catalog");
    }
    strata[t < 0 ? catalog.size() : static_cast<size_t>(t)].push_back(i);
  }
  DatasetSplit split;
  for (size_t s = 0; s < strata.size(); ++s) {
    std::vector<size_t>& members = strata[s];
    if (members.empty()) continue;
    std::string key = s < catalog.size() ? catalog.label(s) : "";
    std::mt19937_64 rng(Mix(seed, key));
    std::shuffle(members.begin(), members.end(), rng);
    const int64_t n = static_cast<int64_t>(members.size());
    int64_t n_val = 0;
    int64_t n_test = 0;
    if (n < 3) {
      split.warnings.push_back("type '" + key + "' has " + std::to_string(n) +
                               " instance(s); all assigned to train");
    } else {
      n_val = RoundHalfUp(ratios.validation * static_cast<double>(n));
      n_test = RoundHalfUp(ratios.test * static_cast<double>(n));
      while (n_val + n_test > n) (n_test > 0 ? n_test : n_val)--;
    }
    int64_t n_train = n - n_val - n_test;
    for (int64_t i = 0; i < n; ++i) {
      const std::string& id = mentions[members[i]].id;
      if (i < n_train) {
        split.train.push_back(id);
      } else if (i < n_train + n_val) {
        split.validation.push_back(id);
      } else {
        split.test.push_back(id);
      }
    }
  }
  return split;
}

void WriteSplitManifest(const std::string& dir, const DatasetSplit& split,
                        const SplitProvenance& provenance) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::vector<std::string>& ids) {
    std::ofstream os(std::filesystem::path(dir) / name);
    if (!os) throw FormatError("cannot write manifest in " + dir);
    os << "# seed=" << provenance.seed << " ratios=" << provenance.ratios.train << ","
       << provenance.ratios.validation << "," << provenance.ratios.test
       << " version=" << provenance.tool_version << "\n";
    for (const std::string& id : ids) os << id << "\n";
  };
  write("train.ids", split.train);
  write("validation.ids", split.validation);
  write("test.ids", split.test);
}

DatasetSplit ReadSplitManifest(const std::string& dir, SplitProvenance* provenance) {
  auto read = [&](const std::string& name) {
    std::ifstream in(std::filesystem::path(dir) / name);
    if (!in) throw FormatError("missing manifest " + name + " in " + dir);
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line[0] == '#') {
        if (provenance != nullptr) {
          std::istringstream hs(line.substr(1));
          std::string field;
          while (hs >> field) {
            auto eq = field.find('=');
            if (eq == std::string::npos) continue;
            std::string k = field.substr(0, eq);
            std::string v = field.substr(eq + 1);
            if (k == "seed") provenance->seed = std::stoull(v);
            if (k == "version") provenance->tool_version = v;
            if (k == "ratios") {
              std::replace(v.begin(), v.end(), ',', ' ');
              std::istringstream rs(v);
              rs >> provenance->ratios.train >> provenance->ratios.validation >>
                  provenance->ratios.test;
            }
          }
        }
        continue;
      }
      ids.push_back(line);
    }
    return ids;
  };
  DatasetSplit split;
  split.train = read("train.ids");
  split.validation = read("validation.ids");
  split.test = read("test.ids");
  return split;
}

TrainingScope::TrainingScope() { ++training_depth; }
TrainingScope::~TrainingScope() { --training_depth; }
bool TrainingScope::Active() { return training_depth > 0; }

void GoldStore::Put(const EventMention& original) { gold_[original.id] = original; }

bool GoldStore::Contains(std::string_view id) const { return gold_.find(id) != gold_.end(); }

const EventMention& GoldStore::Gold(std::string_view id) const {
  if (TrainingScope::Active()) {
    throw LeakageError("gold annotation of masked mention '" + std::string(id) +
                       "' requested during training");
  }
  auto it = gold_.find(id);
  if (it == gold_.end()) {
    throw ConfigError("no gold annotation for " + std::string(id));
  }
  return it->second;
}

std::vector<EventMention> GoldStore::Restore(std::span<const EventMention> view) const {
  std::vector<EventMention> out;
  out.reserve(view.size());
  for (const EventMention& m : view) {
    out.push_back(Contains(m.id) ? Gold(m.id) : m);
  }
  return out;
}

MaskedCorpus MaskUnseenAnnotations(std::span<const EventMention> mentions,
                                   const EventTypeCatalog& catalog) {
  if (!catalog.partitioned()) {
    throw ConfigError("mask_unseen_annotations: catalog not partitioned");
  }
  MaskedCorpus out;
  out.view.reserve(mentions.size());
  for (const EventMention& m : mentions) {
    EventMention v = m;
    if (m.label && catalog.IsSeenLabel(*m.label)) {
      v.visibility = Visibility::kSeen;
    } else {
      v.visibility = Visibility::kUnseen;
      if (m.label || m.trigger) {
        EventMention original = m;
        original.visibility = Visibility::kUnseen;
        out.gold.Put(original);
      }
      v.trigger.reset();
      v.label.reset();
    }
    out.view.push_back(std::move(v));
  }
  return out;
}

std::vector<EventMention> SelectMentions(std::span<const EventMention> all,
                                         std::span<const std::string> ids) {
  std::map<std::string_view, size_t> index;
  for (size_t i = 0; i < all.size(); ++i) index[all[i].id] = i;
  std::vector<EventMention> out;
  out.reserve(ids.size());
  for (const std::string& id : ids) {
    auto it = index.find(id);
    if (it == index.end()) throw ConfigError("unknown mention id " + id);
    out.push_back(all[it->second]);
  }
  return out;
}

}  // namespace pbct

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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "json.hpp"
#include "pbct/seed.h"
#include "pbct/status.h"
#include "pbct/utf8.h"

namespace pbct {
namespace {

using json = nlohmann::json;

// Code point span of the first whole-word occurrence of `word`.
std::optional<TriggerSpan> LocateWord(const std::string& text, const std::string& word) {
  size_t byte = utf8::FindWord(text, word);
  if (byte == std::string::npos) return std::nullopt;
  const std::vector<size_t> cp = utf8::ByteToCodepoint(text);
  size_t start = cp[byte];
  size_t end =
      byte + word.size() >= cp.size() ? utf8::CodepointCount(text) : cp[byte + word.size()];
  return TriggerSpan{start, end};
}

}  // namespace

ParaphraseMode ParseParaphraseMode(std::string_view name) {
  if (name == "identity_stub") return ParaphraseMode::kIdentityStub;
  if (name == "cached_table") return ParaphraseMode::kCachedTable;
  if (name == "external_backtranslation") return ParaphraseMode::kExternalBacktranslation;
  throw ConfigError("unknown paraphrase mode '" + std::string(name) + "'");
}

std::string_view ParaphraseModeName(ParaphraseMode mode) {
  switch (mode) {
    case ParaphraseMode::kIdentityStub:
      return "identity_stub";
    case ParaphraseMode::kCachedTable:
      return "cached_table";
    case ParaphraseMode::kExternalBacktranslation:
      return "external_backtranslation";
  }
  return "identity_stub";
}

std::unique_ptr<CachedParaphraser> CachedParaphraser::FromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open paraphrase table " + path);
  std::map<std::string, std::string> table;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (utf8::Trim(line).empty()) continue;
    try {
      json rec = json::parse(line);
      table[rec.at("original").get<std::string>()] = rec.at("paraphrase").get<std::string>();
    } catch (const json::exception& e) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return std::make_unique<CachedParaphraser>(std::move(table));
}

std::optional<std::string> CachedParaphraser::Paraphrase(const std::string& text) const {
  auto it = table_.find(text);
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> ExternalParaphraser::Paraphrase(const std::string& text) const {
  namespace fs = std::filesystem;
  fs::path input =
      fs::temp_directory_path() / ("pbct-paraphrase-" + std::to_string(Mix(0, text)) + ".txt");
  {
    std::ofstream os(input);
    if (!os) return std::nullopt;
    os << text << '\n';
  }
  std::string cmd = command_ + " < '" + input.string() + "'";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    fs::remove(input);
    return std::nullopt;
  }
  std::string out;
  char buf[4096];
  while (fgets(buf, sizeof buf, pipe)) {
    out += buf;
    if (!out.empty() && out.back() == '\n') break;
  }
  int status = pclose(pipe);
  fs::remove(input);
  if (status != 0) return std::nullopt;
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
  if (utf8::Trim(out).empty()) return std::nullopt;
  return out;
}

void WriteParaphraseTable(const std::string& path,
                          const std::map<std::string, std::string>& table) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  for (const auto& [orig, para] : table) {
    os << json{{"original", orig}, {"paraphrase", para}}.dump() << '\n';
  }
}

RephraseResult Rephrase(const EventMention& mention, const ParaphraseProvider& provider,
                        const std::string& trigger_word) {
  if (utf8::Trim(mention.text).empty()) {
    throw ConfigError("mention " + mention.id + ": empty text");
  }
  RephraseResult r{mention, false, ""};
  std::optional<std::string> text;
  try {
    text = provider.Paraphrase(mention.text);
  } catch (const LeakageError&) {
    // A provider that reads gold annotations is a bug, not a fallback.
    throw;
  } catch (const std::exception& e) {
    r.fallback = true;
    r.reason = std::string("provider failed: ") + e.what();
    return r;
  }
  if (!text) {
    r.fallback = true;
    r.reason = "no paraphrase available";
    return r;
  }
  if (*text == mention.text) return r;
  std::optional<TriggerSpan> span;
  if (!trigger_word.empty()) span = LocateWord(*text, trigger_word);
  if (!trigger_word.empty() && !span) {
    r.fallback = true;
    r.reason = "trigger '" + trigger_word + "' not preserved";
    return r;
  }
  r.mention.text = *text;
  if (mention.trigger) r.mention.trigger = span;
  return r;
}

EventMention MaskTrigger(const EventMention& mention, TriggerSource source,
                         std::optional<TriggerSpan> predicted) {
  std::optional<TriggerSpan> span = source == TriggerSource::kGold ? mention.trigger : predicted;
  if (!span) {
    throw ConfigError(
        "mention " + mention.id +
        (source == TriggerSource::kGold ? ": no gold trigger to mask" : ": no predicted trigger"));
  }
  const size_t n = utf8::CodepointCount(mention.text);
  if (!(span->start < span->end && span->end <= n)) {
    throw ConfigError("mention " + mention.id + ": trigger span outside text");
  }
  EventMention out = mention;
  out.text = utf8::Substr(mention.text, 0, span->start) + std::string(kMaskToken) +
             utf8::Substr(mention.text, span->end, n);
  if (mention.trigger) {
    out.trigger = TriggerSpan{span->start, span->start + kMaskToken.size()};
  }
  return out;
}

NegativePool::NegativePool(std::span<const EventMention> pool) : pool_(pool) {
  for (size_t i = 0; i < pool.size(); ++i) {
    const EventMention& m = pool[i];
    if (m.visibility == Visibility::kSeen) {
      seen_.push_back(static_cast<int>(i));
      seen_by_label_[m.label.value_or("")].push_back(static_cast<int>(i));
    } else {
      unseen_.push_back(static_cast<int>(i));
    }
  }
}

const EventMention& NegativePool::Draw(const EventMention& original, uint64_t seed) const {
  std::mt19937_64 rng(seed);
  if (original.visibility == Visibility::kUnseen) {
    if (seen_.empty()) throw ConfigError("no seen mentions to draw negatives from");
    std::uniform_int_distribution<size_t> pick(0, seen_.size() - 1);
    return pool_[static_cast<size_t>(seen_[pick(rng)])];
  }
  const std::string label = original.label.value_or("");
  auto same = seen_by_label_.find(label);
  const size_t excluded = same == seen_by_label_.end() ? 0 : same->second.size();
  const size_t other_seen = seen_.size() - excluded;
  const size_t total = other_seen + unseen_.size();
  if (total == 0) throw ConfigError("no negative candidates for mention " + original.id);
  std::uniform_int_distribution<size_t> pick(0, total - 1);
  size_t r = pick(rng);
  if (r >= other_seen) return pool_[static_cast<size_t>(unseen_[r - other_seen])];
  for (int idx : seen_) {
    if (pool_[static_cast<size_t>(idx)].label.value_or("") == label) continue;
    if (r-- == 0) return pool_[static_cast<size_t>(idx)];
  }
  throw ConfigError("negative draw out of range");
}

const EventMention& SampleNegative(const EventMention& original, std::span<const EventMention> pool,
                                   uint64_t seed) {
  NegativePool p(pool);
  return p.Draw(original, seed);
}

ContrastiveBundle BuildBundle(const EventMention& mention, const ParaphraseProvider& provider,
                              const NegativePool& pool, const PbctModel& model, uint64_t seed,
                              std::optional<ViewOutput> original_out) {
  ContrastiveBundle b;
  b.original = mention;
  b.out0 = original_out ? std::move(*original_out) : model.Forward(mention);

  const bool seen = mention.visibility == Visibility::kSeen;
  const std::string trigger_word = seen ? mention.TriggerText() : b.out0.trigger.best_token_text;
  RephraseResult r = Rephrase(mention, provider, trigger_word);
  b.rephrased = std::move(r.mention);
  b.rephrase_fallback = r.fallback;

  b.masked = seen ? MaskTrigger(mention, TriggerSource::kGold)
                  : MaskTrigger(mention, TriggerSource::kPredicted, b.out0.trigger.best_word_span);
  b.negative = pool.Draw(mention, seed);

  b.out1 = b.rephrased.text == mention.text ? b.out0 : model.Forward(b.rephrased);
  b.out2 = model.Forward(b.masked);
  b.out3 = model.Forward(b.negative);
  return b;
}

}  // namespace pbct

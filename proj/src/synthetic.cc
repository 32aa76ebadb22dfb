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

#include "pbct/synthetic.h"

#include <algorithm>
#include <random>

#include "pbct/seed.h"
#include "pbct/utf8.h"

namespace pbct {
namespace {

EventMention MakeMention(std::string id, std::string text, const std::string& trigger,
                         const std::string& label) {
  EventMention m;
  m.id = std::move(id);
  m.text = std::move(text);
  size_t byte = utf8::FindWord(m.text, trigger);
  size_t start = utf8::CodepointCount(std::string_view(m.text).substr(0, byte));
  m.trigger = TriggerSpan{start, start + utf8::CodepointCount(trigger)};
  m.label = label;
  return m;
}

struct SmokeType {
  const char* label;
  std::vector<std::string> triggers;
  std::vector<std::string> objects;
};

const std::vector<SmokeType>& SmokeTypes() {
  // Seen block first, then unseen; each block in label order.
  static const std::vector<SmokeType> kTypes = {
      {"attack", {"attack", "bomb", "raid"}, {"the base", "the village", "the convoy"}},
      {"elect", {"elect", "appoint", "nominate"}, {"a mayor", "a senator", "a chairman"}},
      {"marry", {"marry", "wed", "court"}, {"a doctor", "a singer", "a teacher"}},
      {"travel", {"travel", "fly", "drive"}, {"to paris", "to the coast", "to london"}},
      {"arrest", {"arrest", "detain", "jail"}, {"a suspect", "a thief", "a smuggler"}},
      {"donate", {"donate", "give", "fund"}, {"money", "books", "blood"}},
  };
  return kTypes;
}

constexpr size_t kSmokeSeen = 4;

const std::vector<std::string>& Subjects() {
  static const std::vector<std::string> k = {"the group", "officials", "the man",
                                             "residents", "the army",  "a woman"};
  return k;
}

const std::vector<std::string>& Places() {
  static const std::vector<std::string> k = {"on monday", "last week", "in the city",
                                             "after the meeting", "near the border"};
  return k;
}

}  // namespace

const std::vector<std::pair<std::string, int64_t>>& AceShapedCounts() {
  static const std::vector<std::pair<std::string, int64_t>> k = {
      {"Attack", 902},
      {"Transport", 514},
      {"Die", 513},
      {"Meet", 346},
      {"End-Position", 311},
      {"Transfer-Money", 212},
      {"Elect", 197},
      {"Injure", 84},
      {"Transfer-Ownership", 81},
      {"Phone-Write", 52},
      {"Start-Position", 50},
      {"Trial-Hearing", 50},
      {"Charge-Indict", 48},
      {"Sentence", 48},
      {"Arrest-Jail", 44},
      {"Marry", 39},
      {"Demonstrate", 38},
      {"Sue", 32},
      {"Convict", 30},
      {"Be-Born", 30},
      {"Start-Org", 26},
      {"Release-Parole", 24},
      {"Declare-Bankruptcy", 24},
      {"Appeal", 20},
      {"End-Org", 19},
      {"Divorce", 15},
      {"Fine", 14},
      {"Execute", 12},
      {"Merge-Org", 9},
      {"Nominate", 6},
      {"Extradite", 5},
      {"Acquit", 5},
      {"Pardon", 5},
  };
  return k;
}

SyntheticCorpus AceShapedCorpus(uint64_t seed) {
  SyntheticCorpus c;
  std::vector<std::string> labels;
  std::vector<int64_t> counts;
  for (const auto& [label, n] : AceShapedCounts()) {
    labels.push_back(label);
    counts.push_back(n);
    std::string word = utf8::AsciiLower(label);
    std::replace(word.begin(), word.end(), '-', '_');
    for (int64_t k = 0; k < n; ++k) {
      std::string text = "report " +
                         std::to_string(Mix(seed, {static_cast<uint64_t>(k)}) % 100000) +
                         " describes " + word + " today .";
      c.mentions.push_back(
          MakeMention("ace-" + label + "-" + std::to_string(k), std::move(text), word, label));
    }
  }
  c.catalog = EventTypeCatalog(labels, counts);
  return c;
}

SyntheticCorpus SmokeCorpus(const SmokeOptions& options) {
  SyntheticCorpus c;
  std::vector<std::string> labels;
  std::vector<int64_t> counts;
  for (const SmokeType& type : SmokeTypes()) {
    labels.push_back(type.label);
    counts.push_back(options.per_type);
    struct Combo {
      size_t subject, trigger, object, place;
    };
    std::vector<Combo> combos;
    for (size_t s = 0; s < Subjects().size(); ++s)
      for (size_t t = 0; t < type.triggers.size(); ++t)
        for (size_t o = 0; o < type.objects.size(); ++o)
          for (size_t p = 0; p < Places().size(); ++p) combos.push_back({s, t, o, p});
    std::mt19937_64 rng(Mix(options.seed, type.label));
    std::shuffle(combos.begin(), combos.end(), rng);
    for (int k = 0; k < options.per_type; ++k) {
      // Past the distinct combinations, texts repeat.
      const Combo& x = combos[static_cast<size_t>(k) % combos.size()];
      const std::string& trigger = type.triggers[x.trigger];
      std::string text = Subjects()[x.subject] + " will " + trigger + " " + type.objects[x.object] +
                         " " + Places()[x.place] + " .";
      size_t s2 = (x.subject + 1 + rng() % (Subjects().size() - 1)) % Subjects().size();
      size_t p2 = (x.place + 1 + rng() % (Places().size() - 1)) % Places().size();
      c.paraphrases[text] = Subjects()[s2] + " plan to " + trigger + " " + type.objects[x.object] +
                            " " + Places()[p2] + " .";
      c.mentions.push_back(MakeMention(std::string("smoke-") + type.label + "-" + std::to_string(k),
                                       std::move(text), trigger, type.label));
    }
  }
  c.catalog = EventTypeCatalog(labels, counts);
  c.catalog.SetPartition(kSmokeSeen);
  return c;
}

}  // namespace pbct

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

// Generated corpora for desk-scale runs and protocol checks.

#ifndef PBCT_SYNTHETIC_H_
#define PBCT_SYNTHETIC_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pbct/corpus.h"

namespace pbct {

struct SyntheticCorpus {
  std::vector<EventMention> mentions;
  // Seen types first when the partition is fixed by construction.
  EventTypeCatalog catalog;
  // original text -> paraphrase, trigger word preserved.
  std::map<std::string, std::string> paraphrases;
};

// 33 types whose counts reproduce the ACE 2005 totals under the standard
// partition and 80/10/10 split: 3805 mentions, 17 seen / 16 unseen types,
// 3043 / 381 / 381 split sizes. The catalog is unpartitioned.
SyntheticCorpus AceShapedCorpus(uint64_t seed);
const std::vector<std::pair<std::string, int64_t>>& AceShapedCounts();

struct SmokeOptions {
  int per_type = 150;
  uint64_t seed = 7;
};

// Six types, four seen and two unseen, fixed by construction. Each type
// owns its trigger words and its object words; subjects and places are
// shared. Paraphrases swap the shared words and keep the trigger.
SyntheticCorpus SmokeCorpus(const SmokeOptions& options = {});

}  // namespace pbct

#endif  // PBCT_SYNTHETIC_H_

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

// Evaluation protocol: seen mentions are classified over every type,
// unseen mentions over the unseen rows only and then mapped one-to-one onto
// the unseen gold types by maximum agreement.

#ifndef PBCT_EVALUATION_H_
#define PBCT_EVALUATION_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pbct/corpus.h"
#include "pbct/metrics.h"
#include "pbct/model.h"

namespace pbct {

struct Prediction {
  std::string id;
  Visibility visibility = Visibility::kSeen;
  int gold_type = -1;
  int predicted = -1;  // argmax row
  std::string trigger_word;
  std::optional<double> g1;
  std::vector<double> event_vector;
};

struct PredictOptions {
  // Unseen mentions take the argmax over every row instead of the unseen
  // block.
  bool unseen_global_argmax = false;
  bool keep_vectors = false;
};

// `view` is the masked split; gold types of unseen mentions come from
// `gold`, so this must run outside a training scope.
std::vector<Prediction> Predict(const PbctModel& model, std::span<const EventMention> view,
                                const GoldStore& gold, const PredictOptions& options = {});

struct Mapping {
  std::vector<std::pair<int, int>> pairs;  // predicted row -> gold type
  int64_t matches = 0;
};

// Maximum-agreement one-to-one mapping from `rows` onto `types`.
Mapping HungarianMap(std::span<const int> predicted, std::span<const int> gold,
                     std::span<const int> rows, std::span<const int> types);

struct TypeReport {
  int type = -1;
  std::string label;
  Visibility visibility = Visibility::kSeen;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int64_t support = 0;
};

struct MetricsReport {
  std::optional<double> f1_seen;
  std::optional<double> f1_unseen;
  std::optional<double> nmi;
  std::optional<double> fm;
  std::optional<double> weighted_precision;
  std::optional<double> weighted_recall;
  std::optional<double> weighted_f1;
  int64_t num_seen = 0;
  int64_t num_unseen = 0;
  std::vector<TypeReport> per_type;
  Mapping hungarian;
};

MetricsReport ComputeMetrics(std::span<const Prediction> predictions,
                             const EventTypeCatalog& catalog,
                             NmiNormalization nmi = NmiNormalization::kArithmetic,
                             bool unseen_global_argmax = false);

// Stable key names; absent metrics serialize as null.
nlohmann::json MetricsToJson(const MetricsReport& report);

struct TypeSaliency {
  int type = -1;
  std::string label;
  int64_t count = 0;
  double mean_g1 = 0.0;
  // sum(g1) / (count - 1); absent for single-sample types.
  std::optional<double> literal_g1;
};

struct SaliencyReport {
  std::vector<TypeSaliency> types;  // sorted by mean_g1 descending
  double threshold = 0.0;           // median of mean_g1
  std::vector<int> trigger_salient;
  std::vector<int> context_salient;
  bool degenerate = false;  // all means equal; split decided by index
  std::vector<std::string> notes;
};

// Mean gate weight g1 per seen type over the seen training mentions; the
// top ceil(n/2) types are trigger-salient, the rest context-salient.
SaliencyReport TriggerSaliency(const PbctModel& model, std::span<const EventMention> train_view);
nlohmann::json SaliencyToJson(const SaliencyReport& report);

// Header line, then one tab-separated record per mention:
// gold label, predicted label, visibility, x_0 .. x_{h-1}.
void ExportEmbeddings(const PbctModel& model, std::span<const EventMention> view,
                      const GoldStore& gold, const std::string& path);

struct EmbeddingRecord {
  std::string gold;
  std::string predicted;
  std::string visibility;
  std::vector<double> x;
};
std::vector<EmbeddingRecord> ReadEmbeddings(const std::string& path);

}  // namespace pbct

#endif  // PBCT_EVALUATION_H_

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

#include "pbct/evaluation.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "pbct/hungarian.h"
#include "pbct/status.h"

namespace pbct {
namespace {

using json = nlohmann::json;

json Optional(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

int GoldType(const EventMention& m, const GoldStore& gold, const EventTypeCatalog& catalog) {
  if (m.visibility == Visibility::kSeen) {
    return m.label ? catalog.IndexOf(*m.label) : -1;
  }
  if (!gold.Contains(m.id)) return -1;
  const EventMention& g = gold.Gold(m.id);
  return g.label ? catalog.IndexOf(*g.label) : -1;
}

}  // namespace

std::vector<Prediction> Predict(const PbctModel& model, std::span<const EventMention> view,
                                const GoldStore& gold, const PredictOptions& options) {
  ad::NoGradGuard no_grad;
  const EventTypeCatalog& catalog = model.catalog();
  std::vector<Prediction> out;
  out.reserve(view.size());
  for (const EventMention& m : view) {
    Prediction p;
    p.id = m.id;
    p.visibility = m.visibility;
    p.gold_type = GoldType(m, gold, catalog);
    std::optional<std::span<const int>> restrict;
    if (m.visibility == Visibility::kUnseen && !options.unseen_global_argmax) {
      restrict = std::span<const int>(catalog.unseen());
    }
    ViewOutput v = model.Forward(m, restrict);
    p.predicted = v.classification.prediction;
    p.trigger_word = v.trigger.best_token_text;
    if (v.gate) p.g1 = v.gate->value()(0, 1);
    if (options.keep_vectors) {
      const ad::Matrix& x = v.event_vector->value();
      p.event_vector.assign(x.data(), x.data() + x.size());
    }
    out.push_back(std::move(p));
  }
  return out;
}

Mapping HungarianMap(std::span<const int> predicted, std::span<const int> gold,
                     std::span<const int> rows, std::span<const int> types) {
  if (predicted.size() != gold.size()) throw ConfigError("label lists differ in length");
  Mapping m;
  if (rows.empty() || types.empty()) return m;
  std::map<int, int> row_index, type_index;
  for (size_t i = 0; i < rows.size(); ++i) row_index[rows[i]] = static_cast<int>(i);
  for (size_t j = 0; j < types.size(); ++j) type_index[types[j]] = static_cast<int>(j);
  std::vector<std::vector<int64_t>> counts(rows.size(), std::vector<int64_t>(types.size(), 0));
  for (size_t k = 0; k < predicted.size(); ++k) {
    auto r = row_index.find(predicted[k]);
    auto t = type_index.find(gold[k]);
    if (r != row_index.end() && t != type_index.end()) ++counts[r->second][t->second];
  }
  Assignment a = MaxWeightAssignment(counts);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (a.row_to_col[i] >= 0) m.pairs.emplace_back(rows[i], types[a.row_to_col[i]]);
  }
  m.matches = a.value;
  return m;
}

MetricsReport ComputeMetrics(std::span<const Prediction> predictions,
                             const EventTypeCatalog& catalog, NmiNormalization nmi,
                             bool unseen_global_argmax) {
  MetricsReport r;
  std::vector<int> seen_gold, seen_pred, unseen_gold, unseen_pred;
  for (const Prediction& p : predictions) {
    if (p.gold_type < 0) continue;
    if (catalog.IsSeen(p.gold_type)) {
      seen_gold.push_back(p.gold_type);
      seen_pred.push_back(p.predicted);
    } else {
      unseen_gold.push_back(p.gold_type);
      unseen_pred.push_back(p.predicted);
    }
  }
  r.num_seen = static_cast<int64_t>(seen_gold.size());
  r.num_unseen = static_cast<int64_t>(unseen_gold.size());

  std::vector<int> all_rows(catalog.size());
  for (size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = static_cast<int>(i);
  std::span<const int> rows = unseen_global_argmax ? std::span<const int>(all_rows)
                                                   : std::span<const int>(catalog.unseen());
  r.hungarian = HungarianMap(unseen_pred, unseen_gold, rows, catalog.unseen());
  std::map<int, int> to_gold(r.hungarian.pairs.begin(), r.hungarian.pairs.end());
  // Rows left unmapped become labels no gold type can match.
  const int offset = static_cast<int>(catalog.size());
  std::vector<int> unseen_mapped;
  for (int pr : unseen_pred) {
    auto it = to_gold.find(pr);
    unseen_mapped.push_back(it == to_gold.end() ? offset + pr : it->second);
  }

  r.f1_seen = WeightedPrf(seen_gold, seen_pred).f1;
  r.f1_unseen = WeightedPrf(unseen_gold, unseen_mapped).f1;
  r.nmi = NormalizedMutualInformation(unseen_gold, unseen_pred, nmi);
  r.fm = FowlkesMallows(unseen_gold, unseen_pred);

  std::vector<int> all_gold = seen_gold, all_pred = seen_pred;
  all_gold.insert(all_gold.end(), unseen_gold.begin(), unseen_gold.end());
  all_pred.insert(all_pred.end(), unseen_mapped.begin(), unseen_mapped.end());
  WeightedScores overall = WeightedPrf(all_gold, all_pred);
  r.weighted_precision = overall.precision;
  r.weighted_recall = overall.recall;
  r.weighted_f1 = overall.f1;
  for (const LabelScores& s : overall.per_label) {
    if (s.label < 0 || s.label >= offset || s.support == 0) continue;
    TypeReport t;
    t.type = s.label;
    t.label = catalog.label(static_cast<size_t>(s.label));
    t.visibility = catalog.IsSeen(s.label) ? Visibility::kSeen : Visibility::kUnseen;
    t.precision = s.precision;
    t.recall = s.recall;
    t.f1 = s.f1;
    t.support = s.support;
    r.per_type.push_back(t);
  }
  return r;
}

json MetricsToJson(const MetricsReport& r) {
  json j;
  j["f1_seen"] = Optional(r.f1_seen);
  j["f1_unseen"] = Optional(r.f1_unseen);
  j["nmi"] = Optional(r.nmi);
  j["fm"] = Optional(r.fm);
  j["weighted_precision"] = Optional(r.weighted_precision);
  j["weighted_recall"] = Optional(r.weighted_recall);
  j["weighted_f1"] = Optional(r.weighted_f1);
  j["num_seen"] = r.num_seen;
  j["num_unseen"] = r.num_unseen;
  json per = json::array();
  for (const TypeReport& t : r.per_type) {
    per.push_back({{"type", t.type},
                   {"label", t.label},
                   {"visibility", VisibilityName(t.visibility)},
                   {"precision", t.precision},
                   {"recall", t.recall},
                   {"f1", t.f1},
                   {"support", t.support}});
  }
  j["per_type"] = per;
  json map = json::array();
  for (const auto& [row, type] : r.hungarian.pairs) {
    map.push_back({{"row", row}, {"type", type}});
  }
  j["hungarian_mapping"] = map;
  j["hungarian_matches"] = r.hungarian.matches;
  return j;
}

SaliencyReport TriggerSaliency(const PbctModel& model, std::span<const EventMention> train_view) {
  if (model.options().disable_sentinel) {
    throw ConfigError("saliency needs the sentinel gate; this model disables it");
  }
  ad::NoGradGuard no_grad;
  const EventTypeCatalog& catalog = model.catalog();
  std::map<int, std::vector<double>> values;
  for (const EventMention& m : train_view) {
    if (m.visibility != Visibility::kSeen || !m.label) continue;
    int t = catalog.IndexOf(*m.label);
    if (t < 0) continue;
    ViewOutput v = model.Forward(m);
    values[t].push_back(v.gate->value()(0, 1));
  }
  SaliencyReport r;
  for (int t : catalog.seen()) {
    auto it = values.find(t);
    if (it == values.end() || it->second.empty()) {
      r.notes.push_back("type '" + catalog.label(static_cast<size_t>(t)) +
                        "' has no training samples; excluded");
      continue;
    }
    TypeSaliency s;
    s.type = t;
    s.label = catalog.label(static_cast<size_t>(t));
    s.count = static_cast<int64_t>(it->second.size());
    double sum = 0.0;
    for (double g : it->second) sum += g;
    s.mean_g1 = sum / static_cast<double>(s.count);
    if (s.count > 1) s.literal_g1 = sum / static_cast<double>(s.count - 1);
    r.types.push_back(s);
  }
  std::stable_sort(r.types.begin(), r.types.end(),
                   [](const TypeSaliency& a, const TypeSaliency& b) {
                     if (a.mean_g1 != b.mean_g1) return a.mean_g1 > b.mean_g1;
                     return a.type < b.type;
                   });
  const size_t n = r.types.size();
  if (n == 0) return r;
  r.threshold = n % 2 == 1 ? r.types[n / 2].mean_g1
                           : 0.5 * (r.types[n / 2 - 1].mean_g1 + r.types[n / 2].mean_g1);
  const size_t top = (n + 1) / 2;
  for (size_t i = 0; i < n; ++i) {
    (i < top ? r.trigger_salient : r.context_salient).push_back(r.types[i].type);
  }
  r.degenerate = r.types.front().mean_g1 == r.types.back().mean_g1 && n > 1;
  if (r.degenerate) r.notes.push_back("all types share one mean; split follows type order");
  return r;
}

json SaliencyToJson(const SaliencyReport& r) {
  json types = json::array();
  for (const TypeSaliency& s : r.types) {
    types.push_back({{"type", s.type},
                     {"label", s.label},
                     {"count", s.count},
                     {"mean_g1", s.mean_g1},
                     {"literal_g1", s.literal_g1 ? json(*s.literal_g1) : json(nullptr)}});
  }
  return {{"types", types},
          {"threshold", r.threshold},
          {"trigger_salient", r.trigger_salient},
          {"context_salient", r.context_salient},
          {"degenerate", r.degenerate},
          {"notes", r.notes}};
}

void ExportEmbeddings(const PbctModel& model, std::span<const EventMention> view,
                      const GoldStore& gold, const std::string& path) {
  PredictOptions opts;
  opts.keep_vectors = true;
  std::vector<Prediction> preds = Predict(model, view, gold, opts);
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write embeddings to " + path);
  const EventTypeCatalog& catalog = model.catalog();
  const int h = model.encoder().hidden_size();
  os << "gold\tpredicted\tvisibility";
  for (int i = 0; i < h; ++i) os << "\tx" << i;
  os << '\n';
  char buf[32];
  for (const Prediction& p : preds) {
    os << (p.gold_type >= 0 ? catalog.label(static_cast<size_t>(p.gold_type)) : "-") << '\t'
       << catalog.label(static_cast<size_t>(p.predicted)) << '\t' << VisibilityName(p.visibility);
    for (double x : p.event_vector) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      os << '\t' << buf;
    }
    os << '\n';
  }
  if (!os) throw ConfigError("failed writing " + path);
}

std::vector<EmbeddingRecord> ReadEmbeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open embeddings " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path + ": missing header");
  std::vector<EmbeddingRecord> out;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    if (fields.size() < 4)
      throw FormatError(path + ":" + std::to_string(line_no) + ": too few fields");
    EmbeddingRecord r{fields[0], fields[1], fields[2], {}};
    for (size_t i = 3; i < fields.size(); ++i) r.x.push_back(std::stod(fields[i]));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace pbct

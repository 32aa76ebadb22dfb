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

#include "pbct/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "pbct/status.h"

namespace pbct {
namespace {

void CheckLengths(std::span<const int> gold, std::span<const int> pred) {
  if (gold.size() != pred.size()) throw ConfigError("label lists differ in length");
}

struct Contingency {
  std::map<std::pair<int, int>, int64_t> cells;
  std::map<int, int64_t> rows;  // gold sizes
  std::map<int, int64_t> cols;  // predicted sizes
  int64_t n = 0;
};

Contingency Count(std::span<const int> gold, std::span<const int> pred) {
  Contingency c;
  for (size_t i = 0; i < gold.size(); ++i) {
    ++c.cells[{gold[i], pred[i]}];
    ++c.rows[gold[i]];
    ++c.cols[pred[i]];
  }
  c.n = static_cast<int64_t>(gold.size());
  return c;
}

double Entropy(const std::map<int, int64_t>& sizes, int64_t n) {
  double h = 0.0;
  for (const auto& [label, count] : sizes) {
    double p = static_cast<double>(count) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return h;
}

double Pairs(int64_t n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1); }

}  // namespace

WeightedScores WeightedPrf(std::span<const int> gold, std::span<const int> pred) {
  CheckLengths(gold, pred);
  WeightedScores out;
  if (gold.empty()) return out;
  std::set<int> labels(gold.begin(), gold.end());
  labels.insert(pred.begin(), pred.end());
  std::map<int, int64_t> tp, support, predicted;
  for (size_t i = 0; i < gold.size(); ++i) {
    ++support[gold[i]];
    ++predicted[pred[i]];
    if (gold[i] == pred[i]) ++tp[gold[i]];
  }
  double wp = 0.0, wr = 0.0, wf = 0.0;
  for (int label : labels) {
    LabelScores s;
    s.label = label;
    s.support = support[label];
    s.predicted = predicted[label];
    const double t = static_cast<double>(tp[label]);
    s.precision = s.predicted > 0 ? t / static_cast<double>(s.predicted) : 0.0;
    s.recall = s.support > 0 ? t / static_cast<double>(s.support) : 0.0;
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                                        : 0.0;
    const double w = static_cast<double>(s.support);
    wp += w * s.precision;
    wr += w * s.recall;
    wf += w * s.f1;
    out.per_label.push_back(s);
  }
  const double n = static_cast<double>(gold.size());
  out.precision = wp / n;
  out.recall = wr / n;
  out.f1 = wf / n;
  return out;
}

std::optional<double> NormalizedMutualInformation(std::span<const int> gold,
                                                  std::span<const int> pred,
                                                  NmiNormalization norm) {
  CheckLengths(gold, pred);
  if (gold.empty()) return std::nullopt;
  Contingency c = Count(gold, pred);
  const double hg = Entropy(c.rows, c.n);
  const double hp = Entropy(c.cols, c.n);
  if (c.rows.size() == 1 && c.cols.size() == 1) return 1.0;
  const double n = static_cast<double>(c.n);
  double mi = 0.0;
  for (const auto& [cell, count] : c.cells) {
    const double nij = static_cast<double>(count);
    const double ai = static_cast<double>(c.rows[cell.first]);
    const double bj = static_cast<double>(c.cols[cell.second]);
    mi += nij / n * std::log(n * nij / (ai * bj));
  }
  const double denom = norm == NmiNormalization::kArithmetic ? 0.5 * (hg + hp) : std::sqrt(hg * hp);
  if (denom <= 0.0) return 0.0;
  return std::clamp(std::max(mi, 0.0) / denom, 0.0, 1.0);
}

std::optional<double> FowlkesMallows(std::span<const int> gold, std::span<const int> pred) {
  CheckLengths(gold, pred);
  if (gold.empty()) return std::nullopt;
  Contingency c = Count(gold, pred);
  double tp = 0.0, gold_pairs = 0.0, pred_pairs = 0.0;
  for (const auto& [cell, count] : c.cells) tp += Pairs(count);
  for (const auto& [label, count] : c.rows) gold_pairs += Pairs(count);
  for (const auto& [label, count] : c.cols) pred_pairs += Pairs(count);
  if (gold_pairs == 0.0 && pred_pairs == 0.0) return 1.0;
  if (tp == 0.0) return 0.0;
  return tp / std::sqrt(gold_pairs * pred_pairs);
}

}  // namespace pbct

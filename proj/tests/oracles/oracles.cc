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

#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace oracle {
namespace {

constexpr double kPivotTol = 1e-11;

// Dense tableau: rows hold [A | rhs]; basis[i] is the column basic in row i.
struct Tableau {
  std::vector<Vec> rows;
  std::vector<int> basis;
  int cols = 0;  // excluding rhs

  double& rhs(int i) { return rows[i][cols]; }

  void Pivot(int r, int c) {
    const double piv = rows[r][c];
    for (double& v : rows[r]) v /= piv;
    for (size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<int>(i) == r) continue;
      const double f = rows[i][c];
      if (f == 0.0) continue;
      for (int j = 0; j <= cols; ++j) rows[i][j] -= f * rows[r][j];
    }
    basis[r] = c;
  }

  // Minimizes cost over columns allowed[j]; Bland's rule on both choices.
  void Optimize(const Vec& cost, const std::vector<bool>& allowed) {
    for (int iter = 0; iter < 100000; ++iter) {
      int enter = -1;
      for (int j = 0; j < cols && enter < 0; ++j) {
        if (!allowed[j]) continue;
        double reduced = cost[j];
        for (size_t i = 0; i < rows.size(); ++i) reduced -= cost[basis[i]] * rows[i][j];
        if (reduced < -1e-12) enter = j;
      }
      if (enter < 0) return;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i][enter] <= kPivotTol) continue;
        const double ratio = rows[i][cols] / rows[i][enter];
        if (ratio < best - 1e-15 ||
            (std::abs(ratio - best) <= 1e-15 && leave >= 0 && basis[i] < basis[leave])) {
          best = ratio;
          leave = static_cast<int>(i);
        }
      }
      if (leave < 0) throw std::runtime_error("transport oracle: unbounded");
      Pivot(leave, enter);
    }
    throw std::runtime_error("transport oracle: iteration limit");
  }
};

double Gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

Vec Affine(const Vec& x, const Mat& w, const Vec& b) {
  Vec out(b);
  for (size_t i = 0; i < x.size(); ++i)
    for (size_t j = 0; j < out.size(); ++j) out[j] += x[i] * w[i][j];
  return out;
}

Vec Norm(const Vec& x, const Vec& g, const Vec& b, double eps) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  Vec out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) / std::sqrt(var + eps) * g[i] + b[i];
  return out;
}

double Entropy(const std::map<int, double>& counts, double n) {
  double h = 0.0;
  for (const auto& [label, c] : counts) h -= c / n * std::log(c / n);
  return h;
}

bool Near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

double TransportSimplex(const Vec& p, const Vec& q, const Mat& cost) {
  const int m = static_cast<int>(p.size());
  const int k = static_cast<int>(q.size());
  if (m == 0 || k == 0 || static_cast<int>(cost.size()) != m) {
    throw std::invalid_argument("transport oracle: shape mismatch");
  }
  const int n = m * k;
  const int rows = m + k;
  Tableau t;
  t.cols = n + rows;
  t.rows.assign(rows, Vec(t.cols + 1, 0.0));
  t.basis.resize(rows);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < k; ++j) t.rows[i][i * k + j] = 1.0;
    t.rows[i][t.cols] = p[i];
  }
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < m; ++i) t.rows[m + j][i * k + j] = 1.0;
    t.rows[m + j][t.cols] = q[j];
  }
  for (int r = 0; r < rows; ++r) {
    t.rows[r][n + r] = 1.0;
    t.basis[r] = n + r;
  }

  // Phase I: drive the artificial sum to zero.
  Vec phase1(t.cols, 0.0);
  for (int r = 0; r < rows; ++r) phase1[n + r] = 1.0;
  t.Optimize(phase1, std::vector<bool>(t.cols, true));
  double infeasibility = 0.0;
  for (int r = 0; r < rows; ++r)
    if (t.basis[r] >= n) infeasibility += t.rhs(r);
  if (infeasibility > 1e-9) throw std::invalid_argument("transport oracle: marginals differ");
  for (int r = 0; r < rows; ++r) {
    if (t.basis[r] < n) continue;
    for (int j = 0; j < n; ++j) {
      if (std::abs(t.rows[r][j]) > kPivotTol) {
        t.Pivot(r, j);
        break;
      }
    }
    // A row left with an artificial is redundant: zero on every structural column.
  }

  // Phase II over structural columns only.
  Vec phase2(t.cols, 0.0);
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(cost[i].size()) != k)
      throw std::invalid_argument("transport oracle: cost shape");
    for (int j = 0; j < k; ++j) phase2[i * k + j] = cost[i][j];
  }
  std::vector<bool> allowed(t.cols, false);
  std::fill(allowed.begin(), allowed.begin() + n, true);
  t.Optimize(phase2, allowed);
  double value = 0.0;
  for (int r = 0; r < rows; ++r) value += phase2[t.basis[r]] * t.rhs(r);
  return value;
}

double HalfL1(const Vec& p, const Vec& q) {
  double s = 0.0;
  for (size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

Mat GreedyCoupling(const Vec& p, const Vec& q, const std::vector<int>& cell_order) {
  Vec rp(p), rq(q);
  Mat gamma(p.size(), Vec(q.size(), 0.0));
  const int k = static_cast<int>(q.size());
  for (int cell : cell_order) {
    const int i = cell / k, j = cell % k;
    const double mass = std::min(rp[i], rq[j]);
    gamma[i][j] += mass;
    rp[i] -= mass;
    rq[j] -= mass;
  }
  return gamma;
}

double CouplingCost(const Mat& gamma, const Mat& cost) {
  double s = 0.0;
  for (size_t i = 0; i < gamma.size(); ++i)
    for (size_t j = 0; j < gamma[i].size(); ++j) s += gamma[i][j] * cost[i][j];
  return s;
}

PermutationResult PermutationAssignment(const std::vector<std::vector<int64_t>>& counts) {
  const size_t k = counts.size();
  if (k > 6) throw std::invalid_argument("permutation oracle: k > 6");
  for (const auto& row : counts)
    if (row.size() != k) throw std::invalid_argument("permutation oracle: not square");
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  PermutationResult best;
  best.value = std::numeric_limits<int64_t>::min();
  do {
    int64_t v = 0;
    for (size_t i = 0; i < k; ++i) v += counts[i][perm[i]];
    if (v > best.value) {
      best.value = v;
      best.row_to_col = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (k == 0) best.value = 0;
  return best;
}

std::optional<ClusteringScores> PairwiseClusteringMetrics(const std::vector<int>& gold,
                                                          const std::vector<int>& pred,
                                                          bool geometric) {
  if (gold.size() != pred.size()) throw std::invalid_argument("clustering oracle: lengths");
  if (gold.empty()) return std::nullopt;
  const double n = static_cast<double>(gold.size());
  std::map<int, double> g, p;
  std::map<std::pair<int, int>, double> joint;
  for (size_t i = 0; i < gold.size(); ++i) {
    g[gold[i]] += 1;
    p[pred[i]] += 1;
    joint[{gold[i], pred[i]}] += 1;
  }
  ClusteringScores s;
  if (g.size() == 1 && p.size() == 1) {
    s.nmi = 1.0;
  } else {
    double mi = 0.0;
    for (const auto& [cell, c] : joint) {
      const double pij = c / n;
      mi += pij * std::log(pij / ((g[cell.first] / n) * (p[cell.second] / n)));
    }
    const double hg = Entropy(g, n), hp = Entropy(p, n);
    const double denom = geometric ? std::sqrt(hg * hp) : 0.5 * (hg + hp);
    s.nmi = denom > 0.0 ? std::clamp(std::max(mi, 0.0) / denom, 0.0, 1.0) : 0.0;
  }
  double both = 0.0, in_gold = 0.0, in_pred = 0.0;
  for (size_t a = 0; a < gold.size(); ++a) {
    for (size_t b = a + 1; b < gold.size(); ++b) {
      const bool sg = gold[a] == gold[b];
      const bool sp = pred[a] == pred[b];
      both += sg && sp;
      in_gold += sg;
      in_pred += sp;
    }
  }
  if (in_gold == 0.0 && in_pred == 0.0) {
    s.fm = 1.0;
  } else {
    s.fm = both == 0.0 ? 0.0 : both / std::sqrt(in_gold * in_pred);
  }
  return s;
}

WeightedPrf WeightedScores(const std::vector<int>& gold, const std::vector<int>& pred) {
  std::set<int> labels(gold.begin(), gold.end());
  labels.insert(pred.begin(), pred.end());
  WeightedPrf out;
  for (int label : labels) {
    double tp = 0, npred = 0, ngold = 0;
    for (size_t i = 0; i < gold.size(); ++i) {
      tp += gold[i] == label && pred[i] == label;
      npred += pred[i] == label;
      ngold += gold[i] == label;
    }
    const double prec = npred > 0 ? tp / npred : 0.0;
    const double rec = ngold > 0 ? tp / ngold : 0.0;
    const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    const double w = ngold / static_cast<double>(gold.size());
    out.precision += w * prec;
    out.recall += w * rec;
    out.f1 += w * f1;
  }
  return out;
}

Mat ToyEncode(const ToyWeights& w, const std::vector<int>& ids) {
  const size_t len = ids.size();
  const size_t h = w.word.at(0).size();
  Mat x(len, Vec(h));
  for (size_t t = 0; t < len; ++t) {
    Vec e(h);
    for (size_t d = 0; d < h; ++d) e[d] = w.word.at(ids[t])[d] + w.position.at(t)[d] + w.type[0][d];
    x[t] = Norm(e, w.emb_g, w.emb_b, w.eps);
  }
  const size_t dh = h / static_cast<size_t>(w.heads);
  for (const ToyLayer& l : w.layers) {
    Mat q(len), k(len), v(len);
    for (size_t t = 0; t < len; ++t) {
      q[t] = Affine(x[t], l.wq, l.bq);
      k[t] = Affine(x[t], l.wk, l.bk);
      v[t] = Affine(x[t], l.wv, l.bv);
    }
    Mat ctx(len, Vec(h, 0.0));
    for (int head = 0; head < w.heads; ++head) {
      const size_t off = head * dh;
      for (size_t a = 0; a < len; ++a) {
        Vec score(len);
        double top = -std::numeric_limits<double>::infinity();
        for (size_t b = 0; b < len; ++b) {
          double dot = 0.0;
          for (size_t d = 0; d < dh; ++d) dot += q[a][off + d] * k[b][off + d];
          score[b] = dot / std::sqrt(static_cast<double>(dh));
          top = std::max(top, score[b]);
        }
        double z = 0.0;
        for (double& s : score) z += (s = std::exp(s - top));
        for (size_t b = 0; b < len; ++b)
          for (size_t d = 0; d < dh; ++d) ctx[a][off + d] += score[b] / z * v[b][off + d];
      }
    }
    for (size_t t = 0; t < len; ++t) {
      Vec attn = Affine(ctx[t], l.wo, l.bo);
      for (size_t d = 0; d < h; ++d) attn[d] += x[t][d];
      x[t] = Norm(attn, l.ln1_g, l.ln1_b, w.eps);
      Vec inner = Affine(x[t], l.w1, l.b1);
      for (double& u : inner) u = Gelu(u);
      Vec ffn = Affine(inner, l.w2, l.b2);
      for (size_t d = 0; d < h; ++d) ffn[d] += x[t][d];
      x[t] = Norm(ffn, l.ln2_g, l.ln2_b, w.eps);
    }
  }
  return x;
}

Vec ToyMaskLogits(const ToyWeights& w, const Vec& hidden_row) {
  Vec t = Affine(hidden_row, w.head_w, w.head_b);
  for (double& u : t) u = Gelu(u);
  t = Norm(t, w.head_g, w.head_beta, w.eps);
  Vec logits(w.word.size());
  for (size_t v = 0; v < w.word.size(); ++v) {
    double dot = w.out_bias[v];
    for (size_t d = 0; d < t.size(); ++d) dot += t[d] * w.word[v][d];
    logits[v] = dot;
  }
  return logits;
}

Vec FiniteDifferenceGradient(const std::function<double(const Vec&)>& f, const Vec& x,
                             double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite differences: step must be positive");
  Vec grad(x.size());
  Vec probe(x);
  for (size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = f(probe);
    probe[i] = x[i] - step;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw std::domain_error("finite differences: non-finite evaluation");
    }
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

const std::vector<OracleEntry>& Registry() {
  static const std::vector<OracleEntry> kRegistry = {
      {"transport_simplex", "Wasserstein / TransportLinearProgram", 1e-6, false,
       [] {
         return Near(TransportSimplex({0.5, 0.5}, {1.0, 0.0}, {{0, 2}, {2, 0}}), 1.0, 1e-12) &&
                Near(TransportSimplex({0.3, 0.7}, {0.3, 0.7}, {{0, 1}, {1, 0}}), 0.0, 1e-12);
       }},
      {"half_l1", "TotalVariation / indicator Wasserstein", 1e-12, false,
       [] { return Near(HalfL1({1, 0}, {0, 1}), 1.0, 0.0); }},
      {"transport_simplex_entropic", "SinkhornCost / SinkhornVar", 5e-3, false,
       [] { return Near(TransportSimplex({1, 0}, {0, 1}, {{0, 1}, {1, 0}}), 1.0, 1e-12); }},
      {"permutation_assignment", "MaxWeightAssignment / HungarianMap", 0.0, false,
       [] {
         PermutationResult r = PermutationAssignment({{0, 5}, {7, 0}});
         return r.value == 12 && r.row_to_col == std::vector<int>{1, 0};
       }},
      {"pairwise_clustering", "NormalizedMutualInformation / FowlkesMallows", 1e-9, false,
       [] {
         auto same = PairwiseClusteringMetrics({0, 0, 1, 1}, {3, 3, 4, 4});
         auto hand = PairwiseClusteringMetrics({0, 0, 1, 1}, {0, 0, 0, 1});
         return same && Near(same->nmi, 1.0, 1e-12) && Near(same->fm, 1.0, 1e-12) && hand &&
                Near(hand->fm, 1.0 / std::sqrt(6.0), 1e-12);
       }},
      {"weighted_scores", "WeightedPrf", 1e-12, false,
       [] {
         WeightedPrf s = WeightedScores({0, 0, 1, 1}, {0, 0, 1, 1});
         return Near(s.f1, 1.0, 1e-12);
       }},
      {"toy_encode", "Transformer::Encode / EncodePrompt", 1e-5, false,
       [] {
         // One token, zero weights: every norm output equals its bias.
         ToyWeights w;
         w.word = w.position = w.type = {{0.0, 0.0}};
         w.emb_g = {1, 1};
         w.emb_b = {0.5, -0.5};
         Mat x = ToyEncode(w, {0});
         return Near(x[0][0], 0.5, 1e-12) && Near(x[0][1], -0.5, 1e-12);
       }},
      {"finite_difference_gradient", "ad::Backward over the loss graph", 1e-4, true,
       [] {
         Vec g = FiniteDifferenceGradient([](const Vec& x) { return x[0] * x[0] + x[1] * x[1]; },
                                          {1.0, 2.0}, 1e-5);
         return Near(g[0], 2.0, 1e-6) && Near(g[1], 4.0, 1e-6);
       }},
  };
  return kRegistry;
}

}  // namespace oracle

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

#include "pbct/transport.h"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pbct/status.h"

namespace pbct {
namespace {

constexpr double kMassTolerance = 1e-6;
constexpr double kFlowEpsilon = 1e-15;

void CheckDistribution(std::span<const double> p, const char* name) {
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < -1e-12) {
      throw NumericError(std::string(name) + " has a negative or non-finite entry");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kMassTolerance) {
    throw NumericError(std::string(name) + " sums to " + std::to_string(sum) + ", not 1");
  }
}

std::vector<double> Normalized(std::span<const double> p) {
  std::vector<double> out(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : out) {
    v = std::max(v, 0.0);
    sum += v;
  }
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace

CostKind ParseCostKind(std::string_view name) {
  if (name == "indicator") return CostKind::kIndicator;
  if (name == "prototype_metric") return CostKind::kPrototypeMetric;
  throw ConfigError("unknown ground cost '" + std::string(name) +
                    "' (expected indicator or prototype_metric)");
}

std::string_view CostKindName(CostKind kind) {
  return kind == CostKind::kIndicator ? "indicator" : "prototype_metric";
}

GroundCost GroundCost::Indicator(int k) {
  ad::Matrix m = ad::Matrix::Ones(k, k);
  m.diagonal().setZero();
  return GroundCost(CostKind::kIndicator, std::move(m));
}

GroundCost GroundCost::PrototypeMetric(const ad::Matrix& prototypes) {
  const Eigen::Index k = prototypes.rows();
  ad::Matrix m = ad::Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      m(i, j) = m(j, i) = (prototypes.row(i) - prototypes.row(j)).norm();
    }
  }
  return GroundCost(CostKind::kPrototypeMetric, std::move(m));
}

GroundCost GroundCost::FromMatrix(ad::Matrix costs) {
  if (costs.rows() != costs.cols()) throw ConfigError("ground cost must be square");
  for (Eigen::Index i = 0; i < costs.rows(); ++i) {
    if (costs(i, i) != 0.0) throw ConfigError("ground cost diagonal must be zero");
    for (Eigen::Index j = 0; j < costs.cols(); ++j) {
      if (!(costs(i, j) >= 0.0) || !std::isfinite(costs(i, j))) {
        throw ConfigError("ground cost entries must be finite and nonnegative");
      }
      if (costs(i, j) != costs(j, i)) throw ConfigError("ground cost must be symmetric");
    }
  }
  return GroundCost(CostKind::kPrototypeMetric, std::move(costs));
}

double TotalVariation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ConfigError("distribution length mismatch");
  double s = 0.0;
  for (size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

// Successive shortest augmenting paths with Dijkstra on reduced costs.
// Nodes: 0 source, 1..k supplies, k+1..2k demands, 2k+1 sink.
double TransportLinearProgram(std::span<const double> p_in, std::span<const double> q_in,
                              const ad::Matrix& cost) {
  const int k = static_cast<int>(p_in.size());
  if (static_cast<int>(q_in.size()) != k || cost.rows() != k || cost.cols() != k) {
    throw ConfigError("transport problem has inconsistent sizes");
  }
  if (k == 0) return 0.0;
  std::vector<double> supply = Normalized(p_in);
  std::vector<double> demand = Normalized(q_in);
  ad::Matrix flow = ad::Matrix::Zero(k, k);

  const int n = 2 * k + 2;
  const int src = 0;
  const int sink = n - 1;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> potential(n, 0.0);
  std::vector<double> dist(n);
  std::vector<int> prev(n);
  std::vector<char> done(n);

  double remaining = 1.0;
  int guard = 0;
  while (remaining > kFlowEpsilon) {
    if (++guard > 64 * k * k + 1024) throw NumericError("transport solve did not converge");
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(prev.begin(), prev.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    dist[src] = 0.0;
    auto relax = [&](int u, int v, double c) {
      double nd = dist[u] + std::max(0.0, c + potential[u] - potential[v]);
      if (nd < dist[v]) {
        dist[v] = nd;
        prev[v] = u;
      }
    };
    for (;;) {
      int u = -1;
      for (int v = 0; v < n; ++v) {
        if (!done[v] && dist[v] < inf && (u < 0 || dist[v] < dist[u])) u = v;
      }
      if (u < 0) break;
      done[u] = 1;
      if (u == src) {
        for (int i = 0; i < k; ++i) {
          if (supply[i] > kFlowEpsilon) relax(u, 1 + i, 0.0);
        }
      } else if (u <= k) {
        const int i = u - 1;
        for (int j = 0; j < k; ++j) relax(u, 1 + k + j, cost(i, j));
      } else if (u < sink) {
        const int j = u - 1 - k;
        if (demand[j] > kFlowEpsilon) relax(u, sink, 0.0);
        for (int i = 0; i < k; ++i) {
          if (flow(i, j) > kFlowEpsilon) relax(u, 1 + i, -cost(i, j));
        }
      }
    }
    if (!(dist[sink] < inf)) break;
    for (int v = 0; v < n; ++v) {
      if (dist[v] < inf) potential[v] += dist[v];
    }
    // Bottleneck along the path, then push.
    double push = inf;
    for (int v = sink; v != src; v = prev[v]) {
      int u = prev[v];
      if (u == src) {
        push = std::min(push, supply[v - 1]);
      } else if (v == sink) {
        push = std::min(push, demand[u - 1 - k]);
      } else if (u > k) {
        push = std::min(push, flow(v - 1, u - 1 - k));
      }
    }
    for (int v = sink; v != src; v = prev[v]) {
      int u = prev[v];
      if (u == src) {
        supply[v - 1] -= push;
      } else if (v == sink) {
        demand[u - 1 - k] -= push;
      } else if (u <= k) {
        flow(u - 1, v - 1 - k) += push;
      } else {
        flow(v - 1, u - 1 - k) -= push;
      }
    }
    remaining -= push;
  }
  double value = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) value += flow(i, j) * cost(i, j);
  }
  return value;
}

double Wasserstein(std::span<const double> p, std::span<const double> q, const GroundCost& cost) {
  if (p.size() != q.size() || static_cast<int>(p.size()) != cost.size()) {
    throw ConfigError("distribution length mismatch");
  }
  CheckDistribution(p, "p");
  CheckDistribution(q, "q");
  if (cost.kind() == CostKind::kIndicator) return TotalVariation(p, q);
  return TransportLinearProgram(p, q, cost.matrix());
}

namespace {

// Scaling-form Sinkhorn iterates kept for the reverse sweep.
struct SinkhornTrace {
  ad::Matrix kernel;                        // exp(-C / eps)
  ad::Matrix kc;                            // kernel .* C
  std::vector<Eigen::VectorXd> a, u, b, v;  // v[0] is the start
  double value = 0.0;
};

SinkhornTrace RunSinkhorn(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                          const ad::Matrix& cost, const SinkhornOptions& options) {
  SinkhornTrace t;
  const Eigen::Index k = cost.rows();
  const double scale = cost.maxCoeff();
  if (!(options.epsilon > 0.0)) throw ConfigError("sinkhorn epsilon must be positive");
  if (scale <= 0.0) {
    t.value = 0.0;
    return t;
  }
  const double eps = options.epsilon * scale;
  t.kernel = (-cost.array() / eps).exp().matrix();
  t.kc = t.kernel.cwiseProduct(cost);
  t.v.push_back(Eigen::VectorXd::Ones(k));
  for (int it = 0; it < options.max_iterations; ++it) {
    Eigen::VectorXd a = t.kernel * t.v.back();
    Eigen::VectorXd u = p.cwiseQuotient(a);
    Eigen::VectorXd b = t.kernel.transpose() * u;
    Eigen::VectorXd v = q.cwiseQuotient(b);
    t.a.push_back(std::move(a));
    t.u.push_back(std::move(u));
    t.b.push_back(std::move(b));
    t.v.push_back(std::move(v));
    // Column marginals are exact after the v update; check the rows.
    Eigen::VectorXd rows = t.u.back().cwiseProduct(t.kernel * t.v.back());
    if ((rows - p).lpNorm<1>() < options.tolerance) break;
  }
  t.value = t.u.back().dot(t.kc * t.v.back());
  if (!std::isfinite(t.value)) throw NumericError("sinkhorn produced a non-finite value");
  return t;
}

Eigen::VectorXd RowToVector(const ad::Matrix& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

}  // namespace

double SinkhornCost(std::span<const double> p, std::span<const double> q, const ad::Matrix& cost,
                    const SinkhornOptions& options) {
  if (p.size() != q.size() || static_cast<Eigen::Index>(p.size()) != cost.rows()) {
    throw ConfigError("distribution length mismatch");
  }
  Eigen::VectorXd pv = Eigen::Map<const Eigen::VectorXd>(p.data(), p.size());
  Eigen::VectorXd qv = Eigen::Map<const Eigen::VectorXd>(q.data(), q.size());
  return RunSinkhorn(pv, qv, cost, options).value;
}

ad::Var TotalVariationVar(const ad::Var& p, const ad::Var& q) {
  ad::Var d = ad::Sub(p, q);
  return ad::Scale(ad::Sum(ad::Add(ad::Relu(d), ad::Relu(ad::Neg(d)))), 0.5);
}

ad::Var SinkhornVar(const ad::Var& p, const ad::Var& q, const ad::Matrix& cost,
                    const SinkhornOptions& options) {
  if (p->cols() != cost.rows() || q->cols() != cost.rows()) {
    throw ConfigError("distribution length mismatch");
  }
  auto trace = std::make_shared<SinkhornTrace>(
      RunSinkhorn(RowToVector(p->value()), RowToVector(q->value()), cost, options));
  ad::Matrix value(1, 1);
  value(0, 0) = trace->value;
  return ad::MakeNode(std::move(value), {p, q}, [p, q, trace](ad::Node& self) {
    const double up = self.grad()(0, 0);
    const Eigen::Index k = p->cols();
    Eigen::VectorXd gp = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd gq = Eigen::VectorXd::Zero(k);
    if (!trace->u.empty()) {
      const size_t steps = trace->u.size();
      Eigen::VectorXd gu = up * (trace->kc * trace->v.back());
      Eigen::VectorXd gv = up * (trace->kc.transpose() * trace->u.back());
      for (size_t t = steps; t-- > 0;) {
        // v_t = q / b_t
        gq += gv.cwiseQuotient(trace->b[t]);
        Eigen::VectorXd gb = -gv.cwiseProduct(trace->v[t + 1]).cwiseQuotient(trace->b[t]);
        // b_t = K^T u_t
        gu += trace->kernel * gb;
        // u_t = p / a_t
        gp += gu.cwiseQuotient(trace->a[t]);
        Eigen::VectorXd ga = -gu.cwiseProduct(trace->u[t]).cwiseQuotient(trace->a[t]);
        // a_t = K v_{t-1}
        gv = trace->kernel.transpose() * ga;
        gu.setZero();
      }
    }
    p->AddGrad(gp.transpose());
    q->AddGrad(gq.transpose());
  });
}

ad::Var TransportVar(const ad::Var& p, const ad::Var& q, const GroundCost& cost,
                     const SinkhornOptions& options) {
  if (cost.kind() == CostKind::kIndicator) return TotalVariationVar(p, q);
  return SinkhornVar(p, q, cost.matrix(), options);
}

}  // namespace pbct

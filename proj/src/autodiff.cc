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

#include "pbct/autodiff.h"

#include <cmath>
#include <unordered_set>

#include "pbct/status.h"

namespace pbct::ad {
namespace {

thread_local bool grad_enabled = true;

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void CheckSameShape(const Var& a, const Var& b, const char* op) {
  if (a->rows() != b->rows() || a->cols() != b->cols()) {
    throw NumericError(std::string(op) + ": shape mismatch " + std::to_string(a->rows()) + "x" +
                       std::to_string(a->cols()) + " vs " + std::to_string(b->rows()) + "x" +
                       std::to_string(b->cols()));
  }
}

}  // namespace

NoGradGuard::NoGradGuard() : previous_(grad_enabled) { grad_enabled = false; }
NoGradGuard::~NoGradGuard() { grad_enabled = previous_; }
bool GradEnabled() { return grad_enabled; }

Var MakeNode(Matrix value, std::vector<Var> parents, Node::BackwardFn fn) {
  auto node = std::make_shared<Node>();
  node->value_ = std::move(value);
  bool needs = false;
  for (const Var& p : parents) needs = needs || p->requires_grad();
  node->requires_grad_ = needs;
  if (needs) {
    node->parents_ = std::move(parents);
    node->backward_ = std::move(fn);
  }
  return node;
}

Var Constant(Matrix value) {
  auto node = std::make_shared<Node>();
  node->value_ = std::move(value);
  return node;
}

Var Leaf(const Parameter& p) {
  auto node = std::make_shared<Node>();
  // Gradients are accumulation state, not part of the parameter value.
  node->param_ = const_cast<Parameter*>(&p);
  node->requires_grad_ = grad_enabled;
  return node;
}

Var Scalar(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return Constant(std::move(m));
}

Var RowVector(std::span<const double> v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) m(0, i) = v[i];
  return Constant(std::move(m));
}

void Backward(const Var& root) {
  if (root->rows() != 1 || root->cols() != 1) {
    throw NumericError("Backward: root must be a scalar");
  }
  if (!root->requires_grad()) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents_.size()) {
      Node* parent = node->parents_[next++].get();
      if (parent->requires_grad_ && visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->MutableGrad()(0, 0) += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->grad_.size() == 0) continue;
    if (node->backward_) node->backward_(*node);
    if (node->param_ != nullptr) {
      if (node->param_->grad.size() == 0) node->param_->ZeroGrad();
      node->param_->grad += node->grad_;
    }
  }
}

Var MatMul(const Var& a, const Var& b) {
  if (a->cols() != b->rows()) throw NumericError("MatMul: inner dimension");
  return MakeNode(a->value() * b->value(), {a, b}, [](Node& n) {
    const Var& a = n.parents()[0];
    const Var& b = n.parents()[1];
    if (a->requires_grad()) a->AddGrad(n.grad() * b->value().transpose());
    if (b->requires_grad()) b->AddGrad(a->value().transpose() * n.grad());
  });
}

Var MatMulBT(const Var& a, const Var& b) {
  if (a->cols() != b->cols()) throw NumericError("MatMulBT: inner dimension");
  return MakeNode(a->value() * b->value().transpose(), {a, b}, [](Node& n) {
    const Var& a = n.parents()[0];
    const Var& b = n.parents()[1];
    if (a->requires_grad()) a->AddGrad(n.grad() * b->value());
    if (b->requires_grad()) b->AddGrad(n.grad().transpose() * a->value());
  });
}

Var Add(const Var& a, const Var& b) {
  CheckSameShape(a, b, "Add");
  return MakeNode(a->value() + b->value(), {a, b}, [](Node& n) {
    n.parents()[0]->AddGrad(n.grad());
    n.parents()[1]->AddGrad(n.grad());
  });
}

Var Sub(const Var& a, const Var& b) {
  CheckSameShape(a, b, "Sub");
  return MakeNode(a->value() - b->value(), {a, b}, [](Node& n) {
    n.parents()[0]->AddGrad(n.grad());
    n.parents()[1]->AddGrad(-n.grad());
  });
}

Var AddRowBroadcast(const Var& a, const Var& row) {
  if (row->rows() != 1 || row->cols() != a->cols()) {
    throw NumericError("AddRowBroadcast: bias shape");
  }
  Matrix out = a->value();
  out.rowwise() += row->value().row(0);
  return MakeNode(std::move(out), {a, row}, [](Node& n) {
    n.parents()[0]->AddGrad(n.grad());
    n.parents()[1]->AddGrad(n.grad().colwise().sum());
  });
}

Var Scale(const Var& a, double s) {
  return MakeNode(a->value() * s, {a}, [s](Node& n) { n.parents()[0]->AddGrad(n.grad() * s); });
}

Var MulScalar(const Var& a, const Var& s) {
  if (s->rows() != 1 || s->cols() != 1) throw NumericError("MulScalar: 1x1");
  return MakeNode(a->value() * s->scalar(), {a, s}, [](Node& n) {
    const Var& a = n.parents()[0];
    const Var& s = n.parents()[1];
    if (a->requires_grad()) a->AddGrad(n.grad() * s->scalar());
    if (s->requires_grad()) {
      Matrix g(1, 1);
      g(0, 0) = n.grad().cwiseProduct(a->value()).sum();
      s->AddGrad(g);
    }
  });
}

Var Neg(const Var& a) { return Scale(a, -1.0); }

Var Gelu(const Var& a) {
  Matrix out =
      a->value().unaryExpr([](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); });
  return MakeNode(std::move(out), {a}, [](Node& n) {
    const Var& a = n.parents()[0];
    Matrix d = a->value().unaryExpr([](double x) {
      return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
    });
    a->AddGrad(n.grad().cwiseProduct(d));
  });
}

Var Exp(const Var& a) {
  Matrix out = a->value().array().exp().matrix();
  return MakeNode(out, {a},
                  [out](Node& n) { n.parents()[0]->AddGrad(n.grad().cwiseProduct(out)); });
}

Var Log(const Var& a) {
  return MakeNode(a->value().array().log().matrix(), {a}, [](Node& n) {
    const Var& a = n.parents()[0];
    a->AddGrad(n.grad().cwiseQuotient(a->value()));
  });
}

Var Relu(const Var& a) {
  return MakeNode(a->value().cwiseMax(0.0), {a}, [](Node& n) {
    const Var& a = n.parents()[0];
    Matrix mask = (a->value().array() > 0.0).cast<double>().matrix();
    a->AddGrad(n.grad().cwiseProduct(mask));
  });
}

Var MinConst(const Var& a, double m) {
  return MakeNode(a->value().cwiseMin(m), {a}, [m](Node& n) {
    const Var& a = n.parents()[0];
    Matrix mask = (a->value().array() < m).cast<double>().matrix();
    a->AddGrad(n.grad().cwiseProduct(mask));
  });
}

Var LayerNorm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  const Matrix& xv = x->value();
  const Eigen::Index h = xv.cols();
  Matrix normed(xv.rows(), h);
  Eigen::VectorXd inv_std(xv.rows());
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    double mean = xv.row(r).mean();
    double var = (xv.row(r).array() - mean).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    normed.row(r) = (xv.row(r).array() - mean) * inv_std(r);
  }
  Matrix out = normed;
  out.array().rowwise() *= gamma->value().row(0).array();
  out.rowwise() += beta->value().row(0);
  return MakeNode(std::move(out), {x, gamma, beta},
                  [normed = std::move(normed), inv_std = std::move(inv_std)](Node& n) {
                    const Var& x = n.parents()[0];
                    const Var& gamma = n.parents()[1];
                    const Var& beta = n.parents()[2];
                    const Matrix& g = n.grad();
                    if (gamma->requires_grad()) {
                      gamma->AddGrad(g.cwiseProduct(normed).colwise().sum());
                    }
                    if (beta->requires_grad()) beta->AddGrad(g.colwise().sum());
                    if (x->requires_grad()) {
                      Matrix dn = g;
                      dn.array().rowwise() *= gamma->value().row(0).array();
                      Matrix dx(g.rows(), g.cols());
                      for (Eigen::Index r = 0; r < g.rows(); ++r) {
                        double mean_dn = dn.row(r).mean();
                        double mean_dn_n = dn.row(r).cwiseProduct(normed.row(r)).mean();
                        dx.row(r) =
                            (dn.row(r).array() - mean_dn - normed.row(r).array() * mean_dn_n) *
                            inv_std(r);
                      }
                      x->AddGrad(dx);
                    }
                  });
}

Var SoftmaxRows(const Var& x) {
  Matrix out = x->value();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    double mx = out.row(r).maxCoeff();
    out.row(r) = (out.row(r).array() - mx).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return MakeNode(out, {x}, [out](Node& n) {
    const Matrix& g = n.grad();
    Matrix dx(g.rows(), g.cols());
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      double dot = g.row(r).dot(out.row(r));
      dx.row(r) = out.row(r).array() * (g.row(r).array() - dot);
    }
    n.parents()[0]->AddGrad(dx);
  });
}

Var LogSoftmaxRows(const Var& x) {
  Matrix out = x->value();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    double mx = out.row(r).maxCoeff();
    double lse = mx + std::log((out.row(r).array() - mx).exp().sum());
    out.row(r).array() -= lse;
  }
  return MakeNode(out, {x}, [out](Node& n) {
    const Matrix& g = n.grad();
    Matrix dx(g.rows(), g.cols());
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      double total = g.row(r).sum();
      dx.row(r) = g.row(r).array() - out.row(r).array().exp() * total;
    }
    n.parents()[0]->AddGrad(dx);
  });
}

Var Rows(const Var& x, Eigen::Index begin, Eigen::Index n_rows) {
  if (begin < 0 || begin + n_rows > x->rows()) {
    throw NumericError("Rows: out of range");
  }
  return MakeNode(x->value().middleRows(begin, n_rows), {x}, [begin, n_rows](Node& n) {
    if (!n.parents()[0]->requires_grad()) return;
    n.parents()[0]->MutableGrad().middleRows(begin, n_rows) += n.grad();
  });
}

Var Row(const Var& x, Eigen::Index i) { return Rows(x, i, 1); }

Var Cols(const Var& x, Eigen::Index begin, Eigen::Index n_cols) {
  if (begin < 0 || begin + n_cols > x->cols()) {
    throw NumericError("Cols: out of range");
  }
  return MakeNode(x->value().middleCols(begin, n_cols), {x}, [begin, n_cols](Node& n) {
    if (!n.parents()[0]->requires_grad()) return;
    n.parents()[0]->MutableGrad().middleCols(begin, n_cols) += n.grad();
  });
}

Var ConcatCols(const std::vector<Var>& parts) {
  Eigen::Index rows = parts.at(0)->rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (p->rows() != rows) throw NumericError("ConcatCols: row mismatch");
    cols += p->cols();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleCols(at, p->cols()) = p->value();
    at += p->cols();
  }
  return MakeNode(std::move(out), parts, [](Node& n) {
    Eigen::Index at = 0;
    for (const Var& p : n.parents()) {
      if (p->requires_grad()) p->AddGrad(n.grad().middleCols(at, p->cols()));
      at += p->cols();
    }
  });
}

Var ConcatRows(const std::vector<Var>& parts) {
  Eigen::Index cols = parts.at(0)->cols();
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    if (p->cols() != cols) throw NumericError("ConcatRows: col mismatch");
    rows += p->rows();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleRows(at, p->rows()) = p->value();
    at += p->rows();
  }
  return MakeNode(std::move(out), parts, [](Node& n) {
    Eigen::Index at = 0;
    for (const Var& p : n.parents()) {
      if (p->requires_grad()) p->AddGrad(n.grad().middleRows(at, p->rows()));
      at += p->rows();
    }
  });
}

Var GatherRows(const Var& table, std::span<const int> ids) {
  std::vector<int> idx(ids.begin(), ids.end());
  Matrix out(static_cast<Eigen::Index>(idx.size()), table->cols());
  for (size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= table->rows()) {
      throw NumericError("GatherRows: index out of range");
    }
    out.row(i) = table->value().row(idx[i]);
  }
  return MakeNode(std::move(out), {table}, [idx = std::move(idx)](Node& n) {
    if (!n.parents()[0]->requires_grad()) return;
    Matrix& g = n.parents()[0]->MutableGrad();
    for (size_t i = 0; i < idx.size(); ++i) g.row(idx[i]) += n.grad().row(i);
  });
}

Var GatherCols(const Var& x, std::span<const int> cols) {
  if (x->rows() != 1) throw NumericError("GatherCols: expects a row vector");
  std::vector<int> idx(cols.begin(), cols.end());
  Matrix out(1, static_cast<Eigen::Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= x->cols()) {
      throw NumericError("GatherCols: index out of range");
    }
    out(0, i) = x->value()(0, idx[i]);
  }
  return MakeNode(std::move(out), {x}, [idx = std::move(idx)](Node& n) {
    if (!n.parents()[0]->requires_grad()) return;
    Matrix& g = n.parents()[0]->MutableGrad();
    for (size_t i = 0; i < idx.size(); ++i) g(0, idx[i]) += n.grad()(0, i);
  });
}

Var Element(const Var& x, Eigen::Index r, Eigen::Index c) {
  Matrix out(1, 1);
  out(0, 0) = x->value()(r, c);
  return MakeNode(std::move(out), {x}, [r, c](Node& n) {
    if (!n.parents()[0]->requires_grad()) return;
    n.parents()[0]->MutableGrad()(r, c) += n.grad()(0, 0);
  });
}

Var Sum(const Var& a) {
  Matrix out(1, 1);
  out(0, 0) = a->value().sum();
  return MakeNode(std::move(out), {a}, [](Node& n) {
    const Var& a = n.parents()[0];
    a->AddGrad(Matrix::Constant(a->rows(), a->cols(), n.grad()(0, 0)));
  });
}

Var Mean(const Var& a) { return Scale(Sum(a), 1.0 / static_cast<double>(a->value().size())); }

Var SumVars(const std::vector<Var>& scalars) {
  Matrix out = Matrix::Zero(1, 1);
  // Fixed left-to-right summation order keeps reductions reproducible.
  for (const Var& s : scalars) out(0, 0) += s->scalar();
  return MakeNode(std::move(out), scalars, [](Node& n) {
    for (const Var& s : n.parents()) s->AddGrad(n.grad());
  });
}

Var EuclideanDistances(const Var& x, const Var& rows) {
  if (x->rows() != 1 || x->cols() != rows->cols()) {
    throw NumericError("EuclideanDistances: shape mismatch");
  }
  Matrix diff = (-rows->value()).rowwise() + x->value().row(0);
  Matrix out(1, rows->rows());
  for (Eigen::Index j = 0; j < rows->rows(); ++j) out(0, j) = diff.row(j).norm();
  return MakeNode(out, {x, rows}, [diff = std::move(diff), out](Node& n) {
    const Var& x = n.parents()[0];
    const Var& c = n.parents()[1];
    Matrix unit = Matrix::Zero(diff.rows(), diff.cols());
    for (Eigen::Index j = 0; j < diff.rows(); ++j) {
      // Subgradient 0 at coincident points.
      if (out(0, j) > 0.0) unit.row(j) = diff.row(j) * (n.grad()(0, j) / out(0, j));
    }
    if (x->requires_grad()) x->AddGrad(unit.colwise().sum());
    if (c->requires_grad()) c->AddGrad(-unit);
  });
}

Var SquaredDistances(const Var& x, const Var& rows) {
  if (x->rows() != 1 || x->cols() != rows->cols()) {
    throw NumericError("SquaredDistances: shape mismatch");
  }
  Matrix diff = (-rows->value()).rowwise() + x->value().row(0);
  Matrix out(1, rows->rows());
  for (Eigen::Index j = 0; j < rows->rows(); ++j) {
    out(0, j) = diff.row(j).squaredNorm();
  }
  return MakeNode(std::move(out), {x, rows}, [diff = std::move(diff)](Node& n) {
    const Var& x = n.parents()[0];
    const Var& c = n.parents()[1];
    Matrix scaled = diff;
    for (Eigen::Index j = 0; j < diff.rows(); ++j) {
      scaled.row(j) *= 2.0 * n.grad()(0, j);
    }
    if (x->requires_grad()) x->AddGrad(scaled.colwise().sum());
    if (c->requires_grad()) c->AddGrad(-scaled);
  });
}

double GradNorm(std::span<Parameter* const> params) {
  double total = 0.0;
  for (const Parameter* p : params) {
    if (p->grad.size() != 0) total += p->grad.squaredNorm();
  }
  return std::sqrt(total);
}

}  // namespace pbct::ad

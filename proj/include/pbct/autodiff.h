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

// Minimal reverse-mode automatic differentiation over dense row-major
// matrices. A computation builds a DAG of Nodes; Backward() on a 1x1 root
// accumulates gradients into every Parameter reachable from it.
//
// Vectors are represented as 1 x n matrices throughout.

#ifndef PBCT_AUTODIFF_H_
#define PBCT_AUTODIFF_H_

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pbct::ad {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A trainable tensor. Gradients accumulate across Backward() calls until
// ZeroGrad().
struct Parameter {
  Parameter() = default;
  Parameter(std::string n, Matrix v) : name(std::move(n)), value(std::move(v)) {
    grad = Matrix::Zero(value.rows(), value.cols());
  }

  std::string name;
  Matrix value;
  Matrix grad;

  void ZeroGrad() { grad.setZero(value.rows(), value.cols()); }
};

class Node;
using Var = std::shared_ptr<Node>;

class Node {
 public:
  using BackwardFn = std::function<void(Node&)>;

  const Matrix& value() const { return param_ ? param_->value : value_; }
  double scalar() const { return value()(0, 0); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

  bool requires_grad() const { return requires_grad_; }
  const Matrix& grad() const { return grad_; }
  const std::vector<Var>& parents() const { return parents_; }

  // Adds `g` into this node's gradient buffer (allocated on first use).
  template <typename Derived>
  void AddGrad(const Eigen::MatrixBase<Derived>& g) {
    if (!requires_grad_) return;
    EnsureGrad();
    grad_ += g;
  }
  Matrix& MutableGrad() {
    EnsureGrad();
    return grad_;
  }

 private:
  friend Var MakeNode(Matrix value, std::vector<Var> parents, BackwardFn fn);
  friend Var Constant(Matrix value);
  friend Var Leaf(const Parameter& p);
  friend void Backward(const Var& root);

  void EnsureGrad() {
    if (grad_.size() == 0) grad_ = Matrix::Zero(rows(), cols());
  }

  Matrix value_;
  Matrix grad_;
  Parameter* param_ = nullptr;
  bool requires_grad_ = false;
  std::vector<Var> parents_;
  BackwardFn backward_;
};

// Disables graph construction for parameters on this thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};
bool GradEnabled();

// Creates an interior node. `fn` receives the node after its gradient has
// been fully accumulated and must push gradients into the parents.
Var MakeNode(Matrix value, std::vector<Var> parents, Node::BackwardFn fn);
Var Constant(Matrix value);
Var Leaf(const Parameter& p);
Var Scalar(double v);
Var RowVector(std::span<const double> v);

// Runs reverse-mode accumulation from a 1x1 root into all parameters.
void Backward(const Var& root);

// Linear algebra.
Var MatMul(const Var& a, const Var& b);
Var MatMulBT(const Var& a, const Var& b);  // a * b^T
Var Add(const Var& a, const Var& b);
Var Sub(const Var& a, const Var& b);
Var AddRowBroadcast(const Var& a, const Var& row);
Var Scale(const Var& a, double s);
Var MulScalar(const Var& a, const Var& s);  // s is 1x1
Var Neg(const Var& a);

// Elementwise nonlinearities.
Var Gelu(const Var& a);
Var Exp(const Var& a);
Var Log(const Var& a);
Var Relu(const Var& a);
Var MinConst(const Var& a, double m);  // min(m, a)

// Row-wise normalizations.
Var LayerNorm(const Var& x, const Var& gamma, const Var& beta, double eps);
Var SoftmaxRows(const Var& x);
Var LogSoftmaxRows(const Var& x);

// Shape manipulation.
Var Rows(const Var& x, Eigen::Index begin, Eigen::Index n);
Var Row(const Var& x, Eigen::Index i);
Var Cols(const Var& x, Eigen::Index begin, Eigen::Index n);
Var ConcatCols(const std::vector<Var>& parts);
Var ConcatRows(const std::vector<Var>& parts);
Var GatherRows(const Var& table, std::span<const int> ids);
Var GatherCols(const Var& x, std::span<const int> cols);  // x is 1 x n
Var Element(const Var& x, Eigen::Index r, Eigen::Index c);

// Reductions.
Var Sum(const Var& a);
Var Mean(const Var& a);
Var SumVars(const std::vector<Var>& scalars);

// Distances from a 1 x h query to each row of an m x h matrix (1 x m).
Var EuclideanDistances(const Var& x, const Var& rows);
Var SquaredDistances(const Var& x, const Var& rows);

// Global L2 norm of the gradient buffers of `params`.
double GradNorm(std::span<Parameter* const> params);

}  // namespace pbct::ad

#endif  // PBCT_AUTODIFF_H_

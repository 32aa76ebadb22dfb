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

#include "pbct/optimizer.h"

#include <cmath>

#include "pbct/status.h"

namespace pbct {

Adam::Adam(std::vector<ParamGroup> groups, double beta1, double beta2, double eps)
    : groups_(std::move(groups)), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const ParamGroup& g : groups_) {
    for (const ad::Parameter* p : g.params) {
      state_.m.push_back(ad::Matrix::Zero(p->value.rows(), p->value.cols()));
      state_.v.push_back(ad::Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
}

double Adam::ClipGradients(double max_norm) {
  double sq = 0.0;
  for (const ParamGroup& g : groups_) {
    for (const ad::Parameter* p : g.params) sq += p->grad.squaredNorm();
  }
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw NumericError("gradient norm is not finite");
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / (norm + 1e-6);
    for (ParamGroup& g : groups_) {
      for (ad::Parameter* p : g.params) p->grad *= scale;
    }
  }
  return norm;
}

void Adam::Step() {
  ++state_.step;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(state_.step));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(state_.step));
  size_t k = 0;
  for (ParamGroup& g : groups_) {
    for (ad::Parameter* p : g.params) {
      ad::Matrix grad = p->grad;
      if (g.weight_decay != 0.0) grad += g.weight_decay * p->value;
      ad::Matrix& m = state_.m[k];
      ad::Matrix& v = state_.v[k];
      m = beta1_ * m + (1.0 - beta1_) * grad;
      v = beta2_ * v + (1.0 - beta2_) * grad.cwiseProduct(grad);
      p->value.array() -= g.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps_);
      ++k;
    }
  }
}

void Adam::ZeroGrad() {
  for (ParamGroup& g : groups_) {
    for (ad::Parameter* p : g.params) p->ZeroGrad();
  }
}

void Adam::set_state(AdamState state) {
  if (state.m.size() != state_.m.size() || state.v.size() != state_.v.size()) {
    throw FormatError("optimizer state does not match the parameter groups");
  }
  for (size_t i = 0; i < state.m.size(); ++i) {
    if (state.m[i].rows() != state_.m[i].rows() || state.m[i].cols() != state_.m[i].cols()) {
      throw FormatError("optimizer state shape mismatch");
    }
  }
  state_ = std::move(state);
}

}  // namespace pbct

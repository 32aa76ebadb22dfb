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

// Adam over parameter groups. Weight decay is the classic L2 form: it is
// added to the gradient before the moment updates.

#ifndef PBCT_OPTIMIZER_H_
#define PBCT_OPTIMIZER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "pbct/autodiff.h"

namespace pbct {

struct ParamGroup {
  std::string name;
  std::vector<ad::Parameter*> params;
  double lr = 1e-3;
  double weight_decay = 0.0;
};

struct AdamState {
  int64_t step = 0;
  // Moments in group order, then parameter order.
  std::vector<ad::Matrix> m;
  std::vector<ad::Matrix> v;
};

class Adam {
 public:
  explicit Adam(std::vector<ParamGroup> groups, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);

  // Scales all gradients so their global norm is at most `max_norm`
  // (no-op for max_norm <= 0). Returns the norm before clipping.
  double ClipGradients(double max_norm);
  void Step();
  void ZeroGrad();

  const std::vector<ParamGroup>& groups() const { return groups_; }
  const AdamState& state() const { return state_; }
  void set_state(AdamState state);

 private:
  std::vector<ParamGroup> groups_;
  double beta1_, beta2_, eps_;
  AdamState state_;
};

}  // namespace pbct

#endif  // PBCT_OPTIMIZER_H_

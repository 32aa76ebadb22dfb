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

#ifndef PBCT_HUNGARIAN_H_
#define PBCT_HUNGARIAN_H_

#include <cstdint>
#include <vector>

namespace pbct {

struct Assignment {
  // row -> column, or -1 for rows left unmatched (more rows than columns).
  std::vector<int> row_to_col;
  int64_t value = 0;
};

// Maximum-weight one-to-one matching on a rows x cols count matrix
// (row-major), solved exactly with shortest augmenting paths.
Assignment MaxWeightAssignment(const std::vector<std::vector<int64_t>>& counts);

}  // namespace pbct

#endif  // PBCT_HUNGARIAN_H_

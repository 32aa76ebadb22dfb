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

#include "pbct/hungarian.h"

#include <algorithm>
#include <limits>

#include "pbct/status.h"

namespace pbct {

// Jonker-Volgenant style potentials on the negated counts. The problem is
// padded to a square matrix with zero-weight dummies; integers keep the
// result exact.
Assignment MaxWeightAssignment(const std::vector<std::vector<int64_t>>& counts) {
  Assignment out;
  const int rows = static_cast<int>(counts.size());
  if (rows == 0) return out;
  const int cols = static_cast<int>(counts[0].size());
  for (const auto& r : counts) {
    if (static_cast<int>(r.size()) != cols) throw ConfigError("ragged count matrix");
  }
  const int n = std::max(rows, cols);
  auto cost = [&](int i, int j) -> int64_t { return (i < rows && j < cols) ? -counts[i][j] : 0; };
  const int64_t inf = std::numeric_limits<int64_t>::max() / 4;
  // 1-based arrays; p[j] is the row matched to column j.
  std::vector<int64_t> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<int64_t> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int64_t delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        int64_t cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  out.row_to_col.assign(rows, -1);
  for (int j = 1; j <= n; ++j) {
    const int i = p[j] - 1;
    if (i < rows && j - 1 < cols) {
      out.row_to_col[i] = j - 1;
      out.value += counts[i][j - 1];
    }
  }
  return out;
}

}  // namespace pbct

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

// Stateless seed derivation. Every random stream in a run is keyed by the
// run seed plus its coordinates, so no generator state crosses a step.

#ifndef PBCT_SEED_H_
#define PBCT_SEED_H_

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace pbct {

// FNV-1a over `key`, folded with `seed`.
inline uint64_t Mix(uint64_t seed, std::string_view key) {
  uint64_t h = 1469598103934665603ULL ^ seed;
  for (unsigned char c : key) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// splitmix64 finalizer chained over the coordinates.
inline uint64_t Mix(uint64_t seed, std::initializer_list<uint64_t> coords) {
  uint64_t h = seed;
  for (uint64_t c : coords) {
    h += 0x9E3779B97F4A7C15ULL + c;
    h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ULL;
    h = (h ^ (h >> 27)) * 0x94D049BB133111EBULL;
    h ^= h >> 31;
  }
  return h;
}

}  // namespace pbct

#endif  // PBCT_SEED_H_

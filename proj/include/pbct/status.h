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

#ifndef PBCT_STATUS_H_
#define PBCT_STATUS_H_

#include <stdexcept>
#include <string>

namespace pbct {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files: corpus records, paraphrase tables, checkpoints.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration or mismatched artifacts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Checkpoint written by an incompatible version.
class VersionError : public Error {
 public:
  using Error::Error;
};

// Gold annotations of unseen types were requested from inside training.
class LeakageError : public Error {
 public:
  using Error::Error;
};

// Numerical failure (non-finite values, invalid distributions).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace pbct

#endif  // PBCT_STATUS_H_

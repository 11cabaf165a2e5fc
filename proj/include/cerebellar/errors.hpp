// Copyright 2026 The cerebellar-residual Authors
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

#ifndef CEREBELLAR_ERRORS_HPP_
#define CEREBELLAR_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace cerebellar {

// Base class for every error raised by the library. Each subclass maps to a
// distinct failure family so callers (and the CLI exit-code table) can branch
// on type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A closed-loop state went non-finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// A file or prior run that an operation depends on does not exist.
class MissingArtifactError : public Error {
 public:
  using Error::Error;
};

// Consolidation was asked to evaluate an adapter on a cell it was not fit on.
class CrossSeverityError : public Error {
 public:
  using Error::Error;
};

inline void RequireSameSize(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": size " + std::to_string(a) +
                         " != " + std::to_string(b));
  }
}

}  // namespace cerebellar

#endif  // CEREBELLAR_ERRORS_HPP_

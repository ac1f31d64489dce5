// Copyright 2026 The drlqr Authors
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace drlqr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical routine failed to converge.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, long iterations)
      : Error(what + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}

  long iterations() const { return iterations_; }

 private:
  long iterations_;
};

/// A closed loop that was required to be stable is not.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

/// Riccati synthesis failed (divergence or singular input weighting).
class SynthesisError : public Error {
 public:
  using Error::Error;
};

/// A gain fails to stabilize a member of an ensemble or minibatch.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, std::size_t index)
      : Error(what + " (member " + std::to_string(index) + ")"), index_(index) {}

  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

}  // namespace drlqr

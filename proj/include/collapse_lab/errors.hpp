// Copyright 2026 The collapse-lab Authors
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

#include <stdexcept>
#include <string>

namespace collapse_lab {

/// A caller broke a documented precondition (non-Hermitian generator,
/// zero vector, out-of-range index, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operand dimensions do not fit together.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A composite space would exceed the configured maximum dimension.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// A model-level invariant failed; `label()` names the invariant and
/// `residual()` carries the measured deviation.
class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(std::string label, double residual, const std::string& what)
      : std::runtime_error(label + ": " + what + " (residual " + std::to_string(residual) + ")"),
        label_(std::move(label)),
        residual_(residual) {}

  const std::string& label() const noexcept { return label_; }
  double residual() const noexcept { return residual_; }

 private:
  std::string label_;
  double residual_;
};

}  // namespace collapse_lab

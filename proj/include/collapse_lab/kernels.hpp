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

#include <span>
#include <vector>

#include "collapse_lab/qalgebra.hpp"

// Data-parallel inner loops behind qalgebra and sewell. Each kernel has a
// serial reference and an OpenMP version; both write every output entry
// exactly once with the same arithmetic, so results are bitwise identical
// regardless of thread count.
namespace collapse_lab::kernels {

using qalgebra::Complex;
using qalgebra::Index;
using qalgebra::Matrix;

enum class Execution { serial, parallel };

namespace serial {

Matrix kron(const Matrix& a, const Matrix& b);

/// keep_object: trace out the apparatus factor, else the object factor.
Matrix partial_trace(const Matrix& w, Index object_dim, Index apparatus_dim, bool keep_object);

/// Phi = sum_{r,s} c_r conj(c_s) E_rs (x) Omega_rs with blocks stored
/// row-major in `blocks` (n*n entries, each N x N).
Matrix assemble_blocks(std::span<const Complex> c, std::span<const Matrix> blocks);

}  // namespace serial

namespace parallel {

Matrix kron(const Matrix& a, const Matrix& b);
Matrix partial_trace(const Matrix& w, Index object_dim, Index apparatus_dim, bool keep_object);
Matrix assemble_blocks(std::span<const Complex> c, std::span<const Matrix> blocks);

}  // namespace parallel

inline Matrix kron(const Matrix& a, const Matrix& b, Execution ex = Execution::parallel) {
  return ex == Execution::serial ? serial::kron(a, b) : parallel::kron(a, b);
}

inline Matrix partial_trace(const Matrix& w, Index object_dim, Index apparatus_dim,
                            bool keep_object, Execution ex = Execution::parallel) {
  return ex == Execution::serial
             ? serial::partial_trace(w, object_dim, apparatus_dim, keep_object)
             : parallel::partial_trace(w, object_dim, apparatus_dim, keep_object);
}

inline Matrix assemble_blocks(std::span<const Complex> c, std::span<const Matrix> blocks,
                              Execution ex = Execution::parallel) {
  return ex == Execution::serial ? serial::assemble_blocks(c, blocks)
                                 : parallel::assemble_blocks(c, blocks);
}

}  // namespace collapse_lab::kernels

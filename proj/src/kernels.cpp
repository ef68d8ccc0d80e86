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

#include "collapse_lab/kernels.hpp"

#include "collapse_lab/errors.hpp"

namespace collapse_lab::kernels {

namespace {

void check_blocks(std::span<const Complex> c, std::span<const Matrix> blocks) {
  const auto n = c.size();
  if (n == 0 || blocks.size() != n * n) throw ShapeError("assemble_blocks: need n*n blocks");
  for (const auto& b : blocks) {
    if (b.rows() != blocks[0].rows() || b.cols() != blocks[0].rows()) {
      throw ShapeError("assemble_blocks: blocks must share one square shape");
    }
  }
}

}  // namespace

namespace serial {

Matrix kron(const Matrix& a, const Matrix& b) {
  const Index ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
  Matrix out(ra * rb, ca * cb);
  for (Index i = 0; i < ra; ++i)
    for (Index k = 0; k < rb; ++k)
      for (Index j = 0; j < ca; ++j)
        for (Index l = 0; l < cb; ++l) out(i * rb + k, j * cb + l) = a(i, j) * b(k, l);
  return out;
}

Matrix partial_trace(const Matrix& w, Index n, Index N, bool keep_object) {
  if (keep_object) {
    Matrix out = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        Complex acc = 0.0;
        for (Index k = 0; k < N; ++k) acc += w(i * N + k, j * N + k);
        out(i, j) = acc;
      }
    return out;
  }
  Matrix out = Matrix::Zero(N, N);
  for (Index k = 0; k < N; ++k)
    for (Index l = 0; l < N; ++l) {
      Complex acc = 0.0;
      for (Index i = 0; i < n; ++i) acc += w(i * N + k, i * N + l);
      out(k, l) = acc;
    }
  return out;
}

Matrix assemble_blocks(std::span<const Complex> c, std::span<const Matrix> blocks) {
  check_blocks(c, blocks);
  const Index n = static_cast<Index>(c.size());
  const Index N = blocks[0].rows();
  Matrix out(n * N, n * N);
  for (Index r = 0; r < n; ++r)
    for (Index s = 0; s < n; ++s) {
      const Complex w = c[r] * std::conj(c[s]);
      const Matrix& blk = blocks[r * n + s];
      for (Index k = 0; k < N; ++k)
        for (Index l = 0; l < N; ++l) out(r * N + k, s * N + l) = w * blk(k, l);
    }
  return out;
}

}  // namespace serial

namespace parallel {

Matrix kron(const Matrix& a, const Matrix& b) {
  const Index ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
  Matrix out(ra * rb, ca * cb);
  // Eigen is column-major: parallelize over output columns.
#pragma omp parallel for collapse(2) schedule(static)
  for (Index j = 0; j < ca; ++j)
    for (Index l = 0; l < cb; ++l)
      for (Index i = 0; i < ra; ++i)
        for (Index k = 0; k < rb; ++k) out(i * rb + k, j * cb + l) = a(i, j) * b(k, l);
  return out;
}

Matrix partial_trace(const Matrix& w, Index n, Index N, bool keep_object) {
  if (keep_object) {
    Matrix out = Matrix::Zero(n, n);
#pragma omp parallel for collapse(2) schedule(static)
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) {
        Complex acc = 0.0;
        for (Index k = 0; k < N; ++k) acc += w(i * N + k, j * N + k);
        out(i, j) = acc;
      }
    return out;
  }
  Matrix out = Matrix::Zero(N, N);
#pragma omp parallel for collapse(2) schedule(static)
  for (Index l = 0; l < N; ++l)
    for (Index k = 0; k < N; ++k) {
      Complex acc = 0.0;
      for (Index i = 0; i < n; ++i) acc += w(i * N + k, i * N + l);
      out(k, l) = acc;
    }
  return out;
}

Matrix assemble_blocks(std::span<const Complex> c, std::span<const Matrix> blocks) {
  check_blocks(c, blocks);
  const Index n = static_cast<Index>(c.size());
  const Index N = blocks[0].rows();
  Matrix out(n * N, n * N);
#pragma omp parallel for collapse(2) schedule(static)
  for (Index s = 0; s < n; ++s)
    for (Index l = 0; l < N; ++l)
      for (Index r = 0; r < n; ++r) {
        const Complex w = c[r] * std::conj(c[s]);
        const Matrix& blk = blocks[r * n + s];
        for (Index k = 0; k < N; ++k) out(r * N + k, s * N + l) = w * blk(k, l);
      }
  return out;
}

}  // namespace parallel

}  // namespace collapse_lab::kernels

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

#include "collapse_lab/qalgebra.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/kernels.hpp"

namespace collapse_lab::qalgebra {

namespace {

OperatorFlags measure_flags(const Matrix& m) {
  OperatorFlags f;
  f.hermitian = max_norm(m - m.adjoint()) <= kTol.hermitian;
  const Matrix id = Matrix::Identity(m.rows(), m.cols());
  f.unitary = max_norm(m.adjoint() * m - id) <= kTol.unitary;
  f.projector = f.hermitian && max_norm(m * m - m) <= kTol.projector;
  return f;
}

void require_square(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw ShapeError("operator must be a non-empty square matrix, got " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

}  // namespace

double max_norm(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double frobenius_norm(const Matrix& m) { return m.norm(); }

OperatorMatrix::OperatorMatrix(Matrix m) : m_(std::move(m)) {
  require_square(m_);
  if (m_.rows() > kMaxDim) {
    throw CapacityError("operator dimension " + std::to_string(m_.rows()) + " exceeds " +
                        std::to_string(kMaxDim));
  }
  flags_ = measure_flags(m_);
}

OperatorMatrix OperatorMatrix::identity(Index dim) {
  return OperatorMatrix(Matrix::Identity(dim, dim));
}

OperatorMatrix OperatorMatrix::zero(Index dim) { return OperatorMatrix(Matrix::Zero(dim, dim)); }

OperatorMatrix OperatorMatrix::diagonal(std::span<const double> entries) {
  Matrix m = Matrix::Zero(static_cast<Index>(entries.size()), static_cast<Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    m(static_cast<Index>(i), static_cast<Index>(i)) = entries[i];
  }
  return OperatorMatrix(std::move(m));
}

double OperatorMatrix::hermiticity_residual() const { return max_norm(m_ - m_.adjoint()); }

double OperatorMatrix::unitarity_residual() const {
  return max_norm(m_.adjoint() * m_ - Matrix::Identity(dim(), dim()));
}

double OperatorMatrix::idempotence_residual() const { return max_norm(m_ * m_ - m_); }

OperatorMatrix OperatorMatrix::adjoint() const { return OperatorMatrix(m_.adjoint()); }

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (a.dim() != b.dim()) throw ShapeError("operator product of mismatched dimensions");
  return OperatorMatrix(a.m_ * b.m_);
}

OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (a.dim() != b.dim()) throw ShapeError("operator sum of mismatched dimensions");
  return OperatorMatrix(a.m_ + b.m_);
}

OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (a.dim() != b.dim()) throw ShapeError("operator difference of mismatched dimensions");
  return OperatorMatrix(a.m_ - b.m_);
}

OperatorMatrix operator*(Complex s, const OperatorMatrix& a) { return OperatorMatrix(s * a.m_); }

StateVector::StateVector(Vector amplitudes) : v_(std::move(amplitudes)) {
  if (v_.size() == 0) throw ShapeError("state vector must be non-empty");
  const double residual = std::abs(v_.squaredNorm() - 1.0);
  if (residual > kTol.norm) {
    throw ContractViolation("state vector not normalized (| |v|^2 - 1 | = " +
                            std::to_string(residual) + ")");
  }
}

StateVector StateVector::normalized(Vector v) {
  const double n = v.norm();
  if (n == 0.0) throw ContractViolation("cannot normalize the zero vector");
  return StateVector(v / n);
}

StateVector StateVector::basis(Index dim, Index k) {
  if (k < 0 || k >= dim) throw ContractViolation("basis index out of range");
  Vector v = Vector::Zero(dim);
  v(k) = 1.0;
  return StateVector(std::move(v));
}

DensityMatrix::DensityMatrix(OperatorMatrix op) : op_(std::move(op)) {
  if (!op_.is_hermitian()) {
    throw ContractViolation("density matrix not Hermitian (residual " +
                            std::to_string(op_.hermiticity_residual()) + ")");
  }
  const double tr_residual = std::abs(op_.trace() - Complex(1.0, 0.0));
  if (tr_residual > kTol.norm) {
    throw ContractViolation("density matrix trace differs from 1 by " +
                            std::to_string(tr_residual));
  }
  const Matrix herm = 0.5 * (op_.matrix() + op_.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  const double min_ev = es.eigenvalues().minCoeff();
  if (min_ev < -kTol.psd) {
    throw ContractViolation("density matrix has negative eigenvalue " + std::to_string(min_ev));
  }
}

DensityMatrix DensityMatrix::pure(const StateVector& v) { return DensityMatrix(projector_onto(v)); }

DensityMatrix DensityMatrix::maximally_mixed(Index dim) {
  return DensityMatrix(Matrix(Matrix::Identity(dim, dim) / static_cast<double>(dim)));
}

OperatorMatrix tensor(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (a.dim() * b.dim() > kMaxDim) {
    throw CapacityError("tensor product dimension " + std::to_string(a.dim() * b.dim()) +
                        " exceeds " + std::to_string(kMaxDim));
  }
  OperatorFlags f;
  f.hermitian = a.flags().hermitian && b.flags().hermitian;
  f.unitary = a.flags().unitary && b.flags().unitary;
  f.projector = a.flags().projector && b.flags().projector;
  return OperatorMatrix(kernels::kron(a.matrix(), b.matrix()), f);
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(tensor(a.op(), b.op()));
}

DensityMatrix partial_trace(const DensityMatrix& w, Index object_dim, Index apparatus_dim,
                            Keep keep) {
  if (object_dim <= 0 || apparatus_dim <= 0 || w.dim() != object_dim * apparatus_dim) {
    throw ShapeError("partial_trace: dim " + std::to_string(w.dim()) + " != " +
                     std::to_string(object_dim) + "*" + std::to_string(apparatus_dim));
  }
  return DensityMatrix(
      kernels::partial_trace(w.matrix(), object_dim, apparatus_dim, keep == Keep::object));
}

SpectralDecomposition::SpectralDecomposition(const OperatorMatrix& h) {
  if (!h.is_hermitian()) {
    throw ContractViolation("spectral decomposition needs a Hermitian operator (residual " +
                            std::to_string(h.hermiticity_residual()) + ")");
  }
  const Matrix herm = 0.5 * (h.matrix() + h.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
  values_ = es.eigenvalues();
  vectors_ = es.eigenvectors();
}

Matrix SpectralDecomposition::exp_i(double t) const {
  Vector phases(values_.size());
  for (Index k = 0; k < values_.size(); ++k) {
    phases(k) = std::polar(1.0, values_(k) * t);
  }
  return vectors_ * phases.asDiagonal() * vectors_.adjoint();
}

OperatorMatrix expm_hermitian(const OperatorMatrix& h, double t) {
  return OperatorMatrix(SpectralDecomposition(h).exp_i(t));
}

OperatorMatrix projector_onto(const StateVector& v) {
  const Vector& a = v.amplitudes();
  return OperatorMatrix(a * a.adjoint());
}

double trace_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("trace_distance: dimension mismatch");
  }
  Eigen::JacobiSVD<Matrix> svd(a - b);
  return 0.5 * svd.singularValues().sum();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_distance(a.matrix(), b.matrix());
}

Matrix commutator(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ShapeError("commutator: dimension mismatch");
  return a * b - b * a;
}

std::vector<SpectralProjector> spectral_projectors(const OperatorMatrix& h, double tol) {
  const SpectralDecomposition sd(h);
  std::vector<SpectralProjector> out;
  const auto& vals = sd.eigenvalues();
  const auto& vecs = sd.eigenvectors();
  for (Index k = 0; k < vals.size(); ++k) {
    if (out.empty() || vals(k) - out.back().eigenvalue > tol) {
      out.push_back({vals(k), Matrix::Zero(h.dim(), h.dim())});
    }
    out.back().projector += vecs.col(k) * vecs.col(k).adjoint();
  }
  return out;
}

}  // namespace collapse_lab::qalgebra

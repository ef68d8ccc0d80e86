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

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "collapse_lab/tolerances.hpp"

/// Dense finite-dimensional linear algebra for quantum states and
/// observables. Values are immutable after construction; structural flags
/// (Hermitian, unitary, projector) are evaluated once, in the constructor.
namespace collapse_lab::qalgebra {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Largest absolute entry.
double max_norm(const Matrix& m);
double frobenius_norm(const Matrix& m);

struct OperatorFlags {
  bool hermitian = false;
  bool unitary = false;
  bool projector = false;
};

class OperatorMatrix {
 public:
  /// Square matrices only; flags are measured against kTol.
  explicit OperatorMatrix(Matrix m);

  static OperatorMatrix identity(Index dim);
  static OperatorMatrix zero(Index dim);
  static OperatorMatrix diagonal(std::span<const double> entries);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  Complex operator()(Index i, Index j) const { return m_(i, j); }

  const OperatorFlags& flags() const { return flags_; }
  bool is_hermitian() const { return flags_.hermitian; }
  bool is_unitary() const { return flags_.unitary; }
  bool is_projector() const { return flags_.projector; }

  // Residuals are recomputed on every call.
  double hermiticity_residual() const;
  double unitarity_residual() const;
  double idempotence_residual() const;

  Complex trace() const { return m_.trace(); }
  OperatorMatrix adjoint() const;

  friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b);
  friend OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b);
  friend OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b);
  friend OperatorMatrix operator*(Complex s, const OperatorMatrix& a);

 private:
  friend OperatorMatrix tensor(const OperatorMatrix&, const OperatorMatrix&);
  OperatorMatrix(Matrix m, OperatorFlags flags) : m_(std::move(m)), flags_(flags) {}

  Matrix m_;
  OperatorFlags flags_;
};

class StateVector {
 public:
  /// Amplitudes must have unit norm within kTol.norm.
  explicit StateVector(Vector amplitudes);
  /// Scales a nonzero vector to unit norm.
  static StateVector normalized(Vector v);
  static StateVector basis(Index dim, Index k);

  Index dim() const { return v_.size(); }
  const Vector& amplitudes() const { return v_; }
  Complex operator[](Index i) const { return v_(i); }

 private:
  Vector v_;
};

class DensityMatrix {
 public:
  /// Checks Hermiticity, unit trace and positivity (smallest eigenvalue
  /// >= -kTol.psd).
  explicit DensityMatrix(OperatorMatrix op);
  explicit DensityMatrix(Matrix m) : DensityMatrix(OperatorMatrix(std::move(m))) {}

  static DensityMatrix pure(const StateVector& v);
  static DensityMatrix maximally_mixed(Index dim);

  Index dim() const { return op_.dim(); }
  const OperatorMatrix& op() const { return op_; }
  const Matrix& matrix() const { return op_.matrix(); }

 private:
  OperatorMatrix op_;
};

enum class Keep { object, apparatus };

/// Kronecker product; result entry [(i*db+k),(j*db+l)] = a[i,j]*b[k,l].
/// Flags propagate conjunctively. Throws CapacityError past kMaxDim.
OperatorMatrix tensor(const OperatorMatrix& a, const OperatorMatrix& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Reduced state of one factor of an (object_dim x apparatus_dim) composite.
DensityMatrix partial_trace(const DensityMatrix& w, Index object_dim, Index apparatus_dim,
                            Keep keep);

/// Eigen-decomposition of a Hermitian operator, reusable for any number of
/// exponentials exp(i h t).
class SpectralDecomposition {
 public:
  explicit SpectralDecomposition(const OperatorMatrix& h);

  Index dim() const { return values_.size(); }
  const Eigen::VectorXd& eigenvalues() const { return values_; }
  const Matrix& eigenvectors() const { return vectors_; }

  /// V diag(exp(i lambda t)) V^dagger.
  Matrix exp_i(double t) const;

 private:
  Eigen::VectorXd values_;
  Matrix vectors_;
};

/// exp(i h t) by spectral decomposition. Throws ContractViolation when h is
/// not Hermitian.
OperatorMatrix expm_hermitian(const OperatorMatrix& h, double t);

/// Rank-one projector v v^dagger.
OperatorMatrix projector_onto(const StateVector& v);

/// Half the trace norm of a - b.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);
double trace_distance(const Matrix& a, const Matrix& b);

Matrix commutator(const Matrix& a, const Matrix& b);

/// Eigenvalue-grouped spectral projectors of a Hermitian operator, in
/// ascending eigenvalue order. Eigenvalues closer than `tol` share a
/// projector.
struct SpectralProjector {
  double eigenvalue;
  Matrix projector;
};
std::vector<SpectralProjector> spectral_projectors(const OperatorMatrix& h, double tol = 1e-9);

}  // namespace collapse_lab::qalgebra

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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "collapse_lab/kernels.hpp"
#include "collapse_lab/qalgebra.hpp"

/// Coupled object-apparatus measurement model for an additively conserved
/// observable O. The object space has the eigenbasis of O as its standard
/// basis; the total Hamiltonian is block diagonal, H_S = sum_r P[u_r] (x) K_r,
/// so every propagator is evaluated one apparatus block at a time.
///
/// Indexing is 0-based throughout: object eigenindex r in [0, n), cells
/// alpha in [0, nu] with alpha = 0 the rest cell, and sigma(r) in [1, nu].
namespace collapse_lab::sewell {

using qalgebra::Complex;
using qalgebra::DensityMatrix;
using qalgebra::Index;
using qalgebra::Matrix;
using qalgebra::OperatorMatrix;
using qalgebra::StateVector;

class ObjectSpec {
 public:
  /// lambdas: eigenvalues of O (pairwise distinct); energies: eigenvalues of
  /// the free object Hamiltonian; amplitudes: c_r with sum |c_r|^2 = 1.
  ObjectSpec(std::vector<double> lambdas, std::vector<double> energies,
             std::vector<Complex> amplitudes);

  Index n() const { return static_cast<Index>(lambdas_.size()); }
  const std::vector<double>& lambdas() const { return lambdas_; }
  const std::vector<double>& energies() const { return energies_; }
  const std::vector<Complex>& amplitudes() const { return amplitudes_; }

  StateVector psi() const;
  OperatorMatrix observable() const;
  OperatorMatrix hamiltonian() const;

 private:
  std::vector<double> lambdas_;
  std::vector<double> energies_;
  std::vector<Complex> amplitudes_;
};

/// Commutative pointer algebra: orthogonal projectors Pi_0..Pi_nu resolving
/// the identity, pointer readings m_1..m_nu, and the injective map sigma from
/// object eigenindices to live cells.
class MacroAlgebra {
 public:
  MacroAlgebra(std::vector<Matrix> projectors, std::vector<double> pointer_values,
               std::vector<int> sigma);

  /// Cells laid out contiguously: apparatus basis index = alpha*cell_dim + k.
  /// Pointer values default to m_alpha = alpha.
  static MacroAlgebra uniform_cells(int nu, Index cell_dim, std::vector<int> sigma);

  Index dim() const { return projectors_.front().rows(); }
  int nu() const { return static_cast<int>(projectors_.size()) - 1; }
  int object_dim() const { return static_cast<int>(sigma_.size()); }

  const Matrix& projector(int alpha) const;
  Index cell_dim(int alpha) const;
  /// m_alpha for alpha in [1, nu].
  double pointer_value(int alpha) const;
  int sigma(int r) const;
  std::optional<int> sigma_inverse(int alpha) const;

  /// M = sum_{alpha>=1} m_alpha Pi_alpha.
  Matrix observable() const;

  /// Coefficients of the orthogonal projection of m onto span{Pi_alpha}
  /// (alpha = 0..nu) and the max-norm residual of what is left over.
  std::pair<std::vector<double>, double> decompose(const Matrix& m) const;

 private:
  std::vector<Matrix> projectors_;
  std::vector<Index> ranks_;
  std::vector<double> pointer_values_;
  std::vector<int> sigma_;
};

class ApparatusSpec {
 public:
  /// `couplings` holds V_0..V_{n-1}; `tau` is the interaction window the
  /// couplings are tuned for.
  ApparatusSpec(MacroAlgebra macro, DensityMatrix omega, OperatorMatrix h_a,
                std::vector<OperatorMatrix> couplings, double tau);

  Index dim() const { return macro_.dim(); }
  const MacroAlgebra& macro() const { return macro_; }
  const DensityMatrix& omega() const { return omega_; }
  const OperatorMatrix& h_a() const { return h_a_; }
  const std::vector<OperatorMatrix>& couplings() const { return couplings_; }
  double tau() const { return tau_; }

  /// Same apparatus with V_r replaced.
  ApparatusSpec with_couplings(std::vector<OperatorMatrix> couplings) const;

 private:
  MacroAlgebra macro_;
  DensityMatrix omega_;
  OperatorMatrix h_a_;
  std::vector<OperatorMatrix> couplings_;
  double tau_;
};

enum class HaMode { zero, cell_commuting };

struct PointerOptions {
  HaMode h_a_mode = HaMode::zero;
  /// Seeds the internal-cell Hamiltonian in cell_commuting mode.
  std::uint64_t seed = 0;
  /// Diagonal spectrum of Omega over K_0; empty means maximally mixed.
  std::vector<double> rest_spectrum;
};

/// Canonical pointer apparatus: N = (n+1)*cell_dim, sigma(r) = r+1, Omega in
/// K_0, and V_r = (pi/(2 tau)) G_r with G_r swapping K_0 and K_sigma(r), so
/// that exp(i V_r tau) carries K_0 onto K_sigma(r).
ApparatusSpec build_pointer_apparatus(int n, Index cell_dim, double tau,
                                      const PointerOptions& options = {});

class SewellModel {
 public:
  /// Caches K_r = H_a + V_r + eps_r I and H_S; throws InvariantViolation if
  /// the rest-state, conservation or coupled-form checks fail.
  SewellModel(ObjectSpec object, ApparatusSpec apparatus, double tau);

  const ObjectSpec& object() const { return object_; }
  const ApparatusSpec& apparatus() const { return apparatus_; }
  const MacroAlgebra& macro() const { return apparatus_.macro(); }
  double tau() const { return tau_; }
  Index n() const { return object_.n(); }
  Index apparatus_dim() const { return apparatus_.dim(); }
  Index dim() const { return n() * apparatus_dim(); }

  const OperatorMatrix& k_op(int r) const { return k_ops_.at(static_cast<std::size_t>(r)); }
  const OperatorMatrix& h_s() const { return h_s_; }
  /// H_o (x) I + I (x) H_a.
  OperatorMatrix h_free() const;

  /// U_r(t) = exp(i K_r t).
  Matrix propagator(int r, double t) const;
  /// exp(i (H_a + eps_r) t), the r-block of the free propagator.
  Matrix free_propagator(int r, double t) const;

  /// max-norm of [O (x) I, H_S].
  double conservation_residual() const { return conservation_residual_; }
  /// max-norm of H_S - (H_o (x) I + I (x) H_a + sum_r P[u_r] (x) V_r).
  double coupled_form_residual() const { return coupled_form_residual_; }

 private:
  ObjectSpec object_;
  ApparatusSpec apparatus_;
  double tau_;
  std::vector<OperatorMatrix> k_ops_;
  OperatorMatrix h_s_;
  std::vector<qalgebra::SpectralDecomposition> k_spectra_;
  std::vector<qalgebra::SpectralDecomposition> free_spectra_;
  double conservation_residual_ = 0.0;
  double coupled_form_residual_ = 0.0;
};

struct EvolvedState {
  double t;
  Index n;
  DensityMatrix phi;
  /// Omega_{r,s}(t), row-major, n*n apparatus-space blocks.
  std::vector<Matrix> omega_blocks;

  const Matrix& omega(int r, int s) const {
    return omega_blocks.at(static_cast<std::size_t>(r * n + s));
  }
};

/// Phi(t): Phi(0) = P[psi] (x) Omega for t <= 0, blockwise interacting
/// evolution on (0, tau], free evolution of Phi(tau) afterwards.
EvolvedState evolve(const SewellModel& model, double t,
                    kernels::Execution ex = kernels::Execution::parallel);

/// F_{r,s;alpha}(t) = tr(Omega_{r,s}(t) Pi_alpha).
Complex f_coeff(const EvolvedState& state, const MacroAlgebra& macro, int r, int s, int alpha);

/// tr[Phi(t) (o (x) m)]; m must lie in the span of the cell projectors.
double expectation(const EvolvedState& state, const OperatorMatrix& o, const OperatorMatrix& m,
                   const MacroAlgebra& macro);
/// E(O) = tr[Phi(t) (o (x) I)].
double object_expectation(const EvolvedState& state, const OperatorMatrix& o);
/// w_alpha(t) for alpha = 0..nu.
std::vector<double> pointer_weights(const EvolvedState& state, const MacroAlgebra& macro);

struct CellExpectation {
  int alpha;
  double weight;
  /// Empty when weight <= w_floor.
  std::optional<double> value;
};

inline constexpr double kWeightFloor = 1e-9;

/// E(O|K_alpha) = E(O (x) Pi_alpha) / w_alpha for every cell alpha = 0..nu.
std::vector<CellExpectation> conditional_expectation(const EvolvedState& state,
                                                     const OperatorMatrix& o,
                                                     const MacroAlgebra& macro,
                                                     double w_floor = kWeightFloor);

/// Same coefficients obtained by solving E(E(O|M) M_j) = E(O (x) M_j) in
/// least squares over a fixed set of test elements M_j of the algebra.
std::vector<CellExpectation> conditional_expectation_via_identity(const EvolvedState& state,
                                                                  const OperatorMatrix& o,
                                                                  const MacroAlgebra& macro,
                                                                  double w_floor = kWeightFloor);

struct MeasurementConditionsReport {
  bool pass = false;
  double cond_tol = 0.0;
  /// F_{r,r;beta}(tau) - delta_{sigma(r),beta}, n x (nu+1).
  Eigen::MatrixXd residuals;
  double max_residual = 0.0;
  /// max over r != s, alpha of |F_{r,s;alpha}(tau)|.
  double max_cross = 0.0;
};

MeasurementConditionsReport verify_measurement_conditions(const SewellModel& model,
                                                          double cond_tol = 1e-8);

struct CollapseReport {
  double expectation = 0.0;
  /// sum_r lambda_r |c_r|^2
  double predicted_expectation = 0.0;
  std::vector<CellExpectation> conditional;
  /// w_alpha(tau) and |c_{sigma^-1(alpha)}|^2 (0 for the rest cell).
  std::vector<double> weights;
  std::vector<double> predicted_weights;
  double max_conditional_residual = 0.0;
  double max_weight_residual = 0.0;
  /// Set when psi is an eigenvector u_k.
  std::optional<int> eigen_input;
  /// max-norm of Phi(tau) - P[u_k] (x) Omega_kk(tau) and of the object
  /// reduced state minus P[u_k]; zero when eigen_input is empty.
  double eigen_state_residual = 0.0;
  double eigen_object_residual = 0.0;
};

/// Requires verify_measurement_conditions to PASS.
CollapseReport collapse_report(const SewellModel& model);

struct TwoStageReport {
  /// P(alpha1, alpha2), (nu1+1) x (nu2+1).
  Eigen::MatrixXd joint;
  /// P(sigma1(r), sigma2(r)) for each r.
  std::vector<double> diagonal;
  double off_diagonal_mass = 0.0;
  /// Single-stage w_alpha(tau1) of the first apparatus.
  std::vector<double> first_stage_weights;
  Index triple_dim = 0;
};

/// Couples the first apparatus on (0, tau1) and a second, independently
/// prepared apparatus on (tau1, tau1 + tau2) in object (x) app1 (x) app2.
TwoStageReport two_stage_measurement(const SewellModel& model, const ApparatusSpec& second);

struct ReverseReport {
  int j = 0;
  DensityMatrix reversed;
  double apparatus_distance = 0.0;
  double object_distance_to_eigenstate = 0.0;
  double object_distance_to_initial = 0.0;
  double full_distance_to_initial = 0.0;
};

/// Runs P[u_j] (x) Omega_jj(tau) backwards with P[u_j] (x) U_j(tau).
ReverseReport reverse_evolution(const SewellModel& model, int j);

}  // namespace collapse_lab::sewell

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
#include <string>
#include <utility>
#include <vector>

#include "collapse_lab/kernels.hpp"
#include "collapse_lab/qalgebra.hpp"
#include "collapse_lab/rng.hpp"
#include "collapse_lab/sewell.hpp"

/// Numerical probes of the no-go results for measurements of observables
/// that are not additively conserved: the commutator obstruction to exact
/// measurement, malfunction probability and Yanase's lower bound, the
/// pointer-mixture criterion, and the Fine-Brown measurement predicate.
namespace collapse_lab::insolubility {

using qalgebra::Complex;
using qalgebra::DensityMatrix;
using qalgebra::Index;
using qalgebra::Matrix;
using qalgebra::OperatorMatrix;
using qalgebra::StateVector;
using sewell::MacroAlgebra;

/// L = L_object (x) I + I (x) L_apparatus.
class ConservedQuantity {
 public:
  ConservedQuantity(OperatorMatrix l_object, OperatorMatrix l_apparatus);

  const OperatorMatrix& l_object() const { return l_object_; }
  const OperatorMatrix& l_apparatus() const { return l_apparatus_; }
  OperatorMatrix total() const;

 private:
  OperatorMatrix l_object_;
  OperatorMatrix l_apparatus_;
};

/// A candidate measurement of `object_obs`: apparatus prepared in
/// `initial_apparatus`, composite unitary `unitary`, and a pointer whose
/// sigma maps eigenindices of object_obs (ascending eigenvalue order) to
/// cells.
class MeasurementScheme {
 public:
  MeasurementScheme(OperatorMatrix object_obs, DensityMatrix initial_apparatus,
                    OperatorMatrix unitary, MacroAlgebra pointer);

  Index object_dim() const { return object_obs_.dim(); }
  Index apparatus_dim() const { return initial_apparatus_.dim(); }
  const OperatorMatrix& object_obs() const { return object_obs_; }
  const DensityMatrix& initial_apparatus() const { return initial_apparatus_; }
  const OperatorMatrix& unitary() const { return unitary_; }
  const MacroAlgebra& pointer() const { return pointer_; }
  const std::vector<StateVector>& eigenstates() const { return eigenstates_; }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }

  /// U (w_object (x) initial_apparatus) U^dagger.
  Matrix apply(const Matrix& w_object) const;

 private:
  OperatorMatrix object_obs_;
  DensityMatrix initial_apparatus_;
  OperatorMatrix unitary_;
  MacroAlgebra pointer_;
  std::vector<StateVector> eigenstates_;
  std::vector<double> eigenvalues_;
};

// ------------------------------------------------------------------- WAY

struct WayVerdict {
  double residual = 0.0;
  bool exact_possible = false;
  std::string statement;
};

/// ||[A, L_object]||_max; exact measurement needs it to vanish.
WayVerdict way_obstruction(const OperatorMatrix& a_obj, const ConservedQuantity& l);

// --------------------------------------------------- malfunction and Yanase

struct MalfunctionReport {
  /// max_mu (1 - success_mu), the worst case.
  double epsilon = 0.0;
  /// Input-averaged failure probability, reported alongside.
  double mean_epsilon = 0.0;
  /// (eigenindex, pointer hit probability).
  std::vector<std::pair<int, double>> per_eigenstate;
  /// Filled by yanase_bound_check.
  std::optional<double> m_squared;
  std::optional<double> bound;
};

MalfunctionReport malfunction_epsilon(const MeasurementScheme& scheme);

enum class YanaseVerdict { satisfied, violated, degenerate, not_applicable };
std::string to_string(YanaseVerdict v);

struct YanaseReport {
  YanaseVerdict verdict = YanaseVerdict::not_applicable;
  MalfunctionReport malfunction;
  double m_squared = 0.0;
  /// 1/(8 M^2); +inf when M^2 = 0.
  double bound = 0.0;
  /// Var of L_apparatus in the initial apparatus state and the finite-size
  /// bound 1/(8 (1 + Var)), which holds for every conserving scheme whose
  /// pointer commutes with L_apparatus.
  double variance = 0.0;
  double exact_bound = 0.0;
  bool exact_bound_holds = false;
  double conservation_residual = 0.0;
  std::string reason;
};

/// Applicable to a qubit object with L_object = sigma_z, an equatorial
/// observable (sigma_x, sigma_y, ...), and a pointer commuting with
/// L_apparatus. Throws ContractViolation if the scheme does not conserve L.
YanaseReport yanase_bound_check(const MeasurementScheme& scheme, const ConservedQuantity& l);

// ----------------------------------------------------- conserving unitaries

/// Hermitian generators commuting with a given total charge, parametrized
/// block by block in the charge eigenbasis (m^2 real parameters per
/// eigenspace of multiplicity m).
class CommutantParametrization {
 public:
  explicit CommutantParametrization(const OperatorMatrix& l_total, double tol = 1e-9);

  Index dim() const { return basis_.rows(); }
  Index num_params() const { return num_params_; }
  const std::vector<std::vector<Index>>& blocks() const { return blocks_; }

  Matrix generator(std::span<const double> params) const;
  /// exp(i G(params)).
  Matrix unitary(std::span<const double> params) const;
  /// sum_b P_b h P_b.
  Matrix project(const Matrix& h) const;
  /// Gaussian Hermitian generator projected onto the commutant, exponentiated.
  Matrix random_unitary(Rng& rng) const;

 private:
  Matrix basis_;
  std::vector<std::vector<Index>> blocks_;
  Index num_params_ = 0;
};

/// Ladder apparatus charge 2 J_z on d levels: diag(2k - (d - 1)), k = 0..d-1,
/// so one object flip under sigma_z is absorbed by one ladder step.
OperatorMatrix ladder_charge(Index d);

/// Qubit pointer on a d-level ladder: empty rest cell, cell 1 = even levels,
/// cell 2 = odd levels; sigma sends the +1 eigenstate of sigma_x to cell 1.
MacroAlgebra parity_pointer(Index d);

OperatorMatrix pauli_x();
OperatorMatrix pauli_y();
OperatorMatrix pauli_z();

/// Conserving sigma_x measurement on a (2 ell + 1)-level ladder with the
/// apparatus in the uniform superposition; per-sector Hadamard couplings.
/// Malfunction probability is 1/(2 ell + 1).
MeasurementScheme araki_yanase_scheme(int ell);
/// Same construction on any ladder dimension d >= 2.
MeasurementScheme araki_yanase_scheme_dim(Index d);
ConservedQuantity ladder_conserved_quantity(Index d);

struct ConservingFamily {
  OperatorMatrix object_obs;
  ConservedQuantity charge;
  DensityMatrix initial_apparatus;
  MacroAlgebra pointer;
};

struct SearchBudget {
  int restarts = 8;
  int evaluations = 20000;
  std::uint64_t seed = 0;
};

struct SearchResult {
  MeasurementScheme scheme;
  double epsilon = 1.0;
  int evaluations_used = 0;
  std::vector<double> params;
};

/// Seeded random restarts + coordinate descent over the commutant
/// parameters. The first restart starts at the identity. Returns the best
/// scheme found, with no claim of global optimality.
SearchResult minimize_epsilon(const ConservingFamily& family, const SearchBudget& budget);

/// sigma_x family on a d-level ladder: uniform apparatus state, parity
/// pointer.
ConservingFamily sigma_x_ladder_family(Index d);
/// sigma_z family on a d-level ladder (d >= 3) with the apparatus in the
/// middle level, where an exact conserving scheme exists.
ConservingFamily sigma_z_ladder_family(Index d);

struct YanaseSweepConfig {
  int samples = 10000;
  Index min_dim = 2;
  Index max_dim = 9;
  std::uint64_t seed = 0;
  /// Apparatus states are drawn Haar-random conditioned on M^2 >= this.
  double min_m_squared = 1.0;
};

struct YanaseSample {
  Index dim = 0;
  double epsilon = 0.0;
  double m_squared = 0.0;
  double bound = 0.0;
  double exact_bound = 0.0;
  YanaseVerdict verdict = YanaseVerdict::not_applicable;
  bool exact_bound_holds = false;
  double conservation_residual = 0.0;
};

/// Sample i uses ladder dimension min_dim + i mod (max_dim - min_dim + 1)
/// and the stream derive_seed(seed, "yanase.sample", i), so serial and
/// parallel runs agree exactly.
std::vector<YanaseSample> yanase_sweep(const YanaseSweepConfig& config,
                                       kernels::Execution ex = kernels::Execution::parallel);

/// One random conserving sigma_x scheme on a d-level ladder.
MeasurementScheme sample_conserving_scheme(Index d, Rng& rng, double min_m_squared);

// ---------------------------------------------------- Shimony and Brown

struct MixtureCheck {
  bool is_mixture = false;
  double off_block_norm = 0.0;
};

/// Block-diagonality of w across I (x) Pi_alpha, measured in Frobenius norm.
MixtureCheck is_pointer_mixture(const Matrix& w, const MacroAlgebra& pointer, double tol = 1e-9);

enum class ShimonyStatus { pass, fail, not_a_mixture };
std::string to_string(ShimonyStatus s);

struct ShimonyReport {
  ShimonyStatus status = ShimonyStatus::not_a_mixture;
  int target_cell = 0;
  /// (cell n, weight a_{alpha,n}) for every nonzero eigenweight of every
  /// cell block.
  std::vector<std::pair<int, double>> weights;
  double off_target_mass = 0.0;
  double delta = 0.0;
  double off_block_norm = 0.0;
};

/// Decomposes U(P[phi] (x) T)U^dagger over pointer eigenstates; PASS iff the
/// weight outside cell sigma(m) is at most delta.
ShimonyReport shimony_approx_check(const MeasurementScheme& scheme, const DensityMatrix& t_init,
                                   const StateVector& phi, int m, double delta);

/// True iff tr(w1 P_k) and tr(w2 P_k) differ by more than 1e-10 for some
/// spectral projector P_k of a.
bool a_distinct(const Matrix& w1, const Matrix& w2, const OperatorMatrix& a);

/// A declared decomposition sum_n c_n P[phi_n] with c_n > 0, sum c_n = 1.
struct Ensemble {
  std::vector<std::pair<double, StateVector>> components;
  Matrix density() const;
};

/// Real unitary evolution: each component of the object ensemble is evolved
/// with w_app attached and the results are re-mixed with unchanged weights.
Matrix rue_evolve(const OperatorMatrix& u, const Ensemble& object, const DensityMatrix& w_app);

struct FineBrownVerdict {
  bool is_measurement = false;
  int distinct_pairs = 0;
  int pairs_passed = 0;
  std::vector<Matrix> finals;
};

FineBrownVerdict fine_brown_is_measurement(const OperatorMatrix& u, const OperatorMatrix& a_obj,
                                           const OperatorMatrix& a_app,
                                           const DensityMatrix& w_app,
                                           const std::vector<Ensemble>& probes);

/// CNOT with the object as control: |k>|p> -> |k>|p xor k>.
OperatorMatrix controlled_shift();
/// Qubit pointer with rank-1 cells |0> (cell 1) and |1> (cell 2) and an empty
/// rest cell; sigma follows ascending sigma_z eigenvalues (-1 -> |1>).
MacroAlgebra qubit_pointer();

/// sigma_z on a qubit read by a 4-level apparatus: rest cell {a, b}, cell 1
/// {2}, cell 2 {3}. U sends a to the correct cell and b to the wrong one, so
/// T = (1 - leak)|a><a| + leak|b><b| leaks `leak` of the weight.
struct LeakyScheme {
  MeasurementScheme scheme;
  DensityMatrix t_init;
};
LeakyScheme leaky_pointer_scheme(double leak);

}  // namespace collapse_lab::insolubility

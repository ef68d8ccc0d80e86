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

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/insolubility.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace collapse_lab;
using namespace collapse_lab::insolubility;
using qalgebra::Vector;

namespace {

Matrix ket_bra(const Vector& a, const Vector& b) { return a * b.adjoint(); }

Vector ket(std::initializer_list<Complex> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (auto z : v) out(i++) = z;
  return out;
}

// Exact sigma_z scheme on a 3-level pointer: CNOT-like swap into cell 1 or 2.
MeasurementScheme exact_sigma_z_scheme() {
  Matrix u = Matrix::Identity(6, 6);
  // |0,0> <-> |0,1> (object up, sigma_z = +1, eigenindex 1 -> cell 1)
  // |1,0> <-> |1,2> (object down, eigenindex 0 -> cell 2)
  u.block(0, 0, 2, 2) << 0, 1, 1, 0;
  u(3, 3) = 0;
  u(5, 5) = 0;
  u(3, 5) = 1;
  u(5, 3) = 1;
  auto macro = sewell::MacroAlgebra::uniform_cells(2, 1, {2, 1});
  return MeasurementScheme(pauli_z(), DensityMatrix::pure(StateVector::basis(3, 0)), OperatorMatrix(u), macro);
}

}  // namespace

TEST_CASE("WAY obstruction residuals") {
  const ConservedQuantity lz(pauli_z(), OperatorMatrix::zero(1));
  const auto commuting = way_obstruction(pauli_z(), lz);
  CHECK(commuting.exact_possible);
  CHECK(commuting.residual == 0.0);
  const auto blocked = way_obstruction(pauli_x(), lz);
  CHECK_FALSE(blocked.exact_possible);
  CHECK(blocked.residual == doctest::Approx(2.0));
  CHECK(blocked.statement.find("cannot hold") != std::string::npos);
  CHECK(way_obstruction(OperatorMatrix::identity(2), ConservedQuantity(pauli_x(), pauli_y())).exact_possible);
}

TEST_CASE("malfunction of an exact scheme and of no interaction") {
  CHECK(malfunction_epsilon(exact_sigma_z_scheme()).epsilon == doctest::Approx(0.0));
  auto macro = sewell::MacroAlgebra::uniform_cells(2, 1, {2, 1});
  const MeasurementScheme idle(pauli_z(), DensityMatrix::pure(StateVector::basis(3, 0)),
                               OperatorMatrix::identity(6), macro);
  const auto rep = malfunction_epsilon(idle);
  CHECK(rep.epsilon == doctest::Approx(1.0));
  CHECK(rep.mean_epsilon == doctest::Approx(1.0));
}

TEST_CASE("malfunction is invariant under relabelling live cells with sigma") {
  std::mt19937_64 rng(41);
  const auto s = sample_conserving_scheme(5, rng, 1.0);
  const auto& p = s.pointer();
  sewell::MacroAlgebra swapped({p.projector(0), p.projector(2), p.projector(1)}, {-1.0, 1.0},
                               {p.sigma(0) == 1 ? 2 : 1, p.sigma(1) == 1 ? 2 : 1});
  const MeasurementScheme relabelled(s.object_obs(), s.initial_apparatus(), s.unitary(), swapped);
  CHECK(malfunction_epsilon(relabelled).epsilon == doctest::Approx(malfunction_epsilon(s).epsilon).epsilon(1e-14));
}

TEST_CASE("Araki-Yanase family hits the derived malfunction values") {
  for (int ell = 1; ell <= 4; ++ell) {
    const auto s = araki_yanase_scheme(ell);
    const auto rep = yanase_bound_check(s, ladder_conserved_quantity(2 * ell + 1));
    CHECK(rep.verdict == YanaseVerdict::satisfied);
    CHECK(rep.malfunction.epsilon == doctest::Approx(1.0 / (2 * ell + 1)).epsilon(1e-12));
    CHECK(rep.conservation_residual <= 1e-12);
  }
  // Even ladders: one sector per pair, half the edge loss.
  CHECK(malfunction_epsilon(araki_yanase_scheme_dim(4)).epsilon == doctest::Approx(0.125));
}

TEST_CASE("Araki-Yanase malfunction is positive and nonincreasing in ell") {
  double prev = 1.0;
  for (int ell = 1; ell <= 4; ++ell) {
    const double eps = malfunction_epsilon(araki_yanase_scheme(ell)).epsilon;
    CHECK(eps > 0.0);
    CHECK(eps <= prev);
    prev = eps;
  }
}

TEST_CASE("Yanase check applicability and degenerate case") {
  // sigma_z on the object: the theorem's hypothesis is unmet.
  auto fam = sigma_z_ladder_family(3);
  const MeasurementScheme commuting(fam.object_obs, fam.initial_apparatus, OperatorMatrix::identity(6), fam.pointer);
  CHECK(yanase_bound_check(commuting, fam.charge).verdict == YanaseVerdict::not_applicable);

  // xi on the zero level of an odd ladder has M^2 = 0.
  const MeasurementScheme zero_var(pauli_x(), DensityMatrix::pure(StateVector::basis(3, 1)),
                                   OperatorMatrix::identity(6), parity_pointer(3));
  const auto rep = yanase_bound_check(zero_var, ladder_conserved_quantity(3));
  CHECK(rep.verdict == YanaseVerdict::degenerate);
  CHECK(std::isinf(rep.bound));
  CHECK(rep.m_squared == 0.0);
}

TEST_CASE("Yanase check refuses non-conserving unitaries") {
  Matrix u = oracle::kron(pauli_x().matrix(), Matrix::Identity(3, 3));
  const MeasurementScheme bad(pauli_x(), DensityMatrix::pure(StateVector::basis(3, 0)), OperatorMatrix(u),
                              parity_pointer(3));
  CHECK_THROWS_AS(yanase_bound_check(bad, ladder_conserved_quantity(3)), ContractViolation);
}

TEST_CASE("commutant unitaries conserve the total charge") {
  std::mt19937_64 rng(42);
  for (Index d = 2; d <= 9; ++d) {
    const auto charge = ladder_conserved_quantity(d);
    const CommutantParametrization param(charge.total());
    CHECK(param.num_params() == 4 * (d - 1) + 2);
    const Matrix u = param.random_unitary(rng);
    CHECK(qalgebra::max_norm(qalgebra::commutator(u, charge.total().matrix())) <= 1e-10);
    CHECK(qalgebra::max_norm(u * u.adjoint() - Matrix::Identity(2 * d, 2 * d)) <= 1e-12);
  }
}

TEST_CASE("search finds an exact scheme for the commuting target") {
  for (Index d : {3, 5}) {
    const auto res = minimize_epsilon(sigma_z_ladder_family(d), {4, 4000, 7});
    CHECK(res.epsilon <= 1e-6);
    CHECK(res.evaluations_used <= 4000);
  }
}

TEST_CASE("search for sigma_x stays above zero and above the bound") {
  double prev = 1.0;
  for (int ell = 1; ell <= 4; ++ell) {
    const Index d = 2 * ell + 1;
    const auto res = minimize_epsilon(sigma_x_ladder_family(d), {4, 6000, 11});
    const auto rep = yanase_bound_check(res.scheme, ladder_conserved_quantity(d));
    CHECK(res.epsilon > 0.0);
    CHECK(res.epsilon >= rep.bound - 1e-10);
    CHECK(res.epsilon <= prev + 1e-12);
    prev = res.epsilon;
  }
}

TEST_CASE("search rejects an empty budget") {
  CHECK_THROWS_AS(minimize_epsilon(sigma_x_ladder_family(3), {0, 100, 1}), ContractViolation);
  CHECK_THROWS_AS(minimize_epsilon(sigma_x_ladder_family(3), {2, 0, 1}), ContractViolation);
}

TEST_CASE("search is deterministic for a fixed seed") {
  const auto a = minimize_epsilon(sigma_x_ladder_family(3), {3, 1500, 99});
  const auto b = minimize_epsilon(sigma_x_ladder_family(3), {3, 1500, 99});
  CHECK(a.params == b.params);
  CHECK(a.epsilon == b.epsilon);
}

TEST_CASE("Yanase sweep: bound holds and parallel equals serial") {
  const YanaseSweepConfig cfg{600, 2, 9, 2024, 1.0};
  const auto par = yanase_sweep(cfg, kernels::Execution::parallel);
  const auto ser = yanase_sweep(cfg, kernels::Execution::serial);
  REQUIRE(par.size() == ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    CHECK(par[i].epsilon == ser[i].epsilon);
    CHECK(par[i].verdict == YanaseVerdict::satisfied);
    CHECK(par[i].exact_bound_holds);
    CHECK(par[i].conservation_residual <= 1e-10);
    CHECK(par[i].m_squared >= 1.0 - 1e-12);
  }
}

TEST_CASE("pointer mixture test") {
  const auto pointer = qubit_pointer();
  const Vector zero = ket({1, 0}), one = ket({0, 1});
  // Block-diagonal mixture.
  const Matrix mix = 0.3 * oracle::kron(ket_bra(zero, zero), ket_bra(zero, zero)) +
                     0.7 * oracle::kron(ket_bra(one, one), ket_bra(one, one));
  const auto a = is_pointer_mixture(mix, pointer);
  CHECK(a.is_mixture);
  CHECK(a.off_block_norm == 0.0);
  // Bell-type state: two off-block entries of magnitude 1/2.
  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::numbers::sqrt2;
  const auto b = is_pointer_mixture(bell * bell.adjoint(), pointer);
  CHECK_FALSE(b.is_mixture);
  CHECK(b.off_block_norm == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  // Product state in one pointer cell.
  const Vector plus = ket({1 / std::numbers::sqrt2, 1 / std::numbers::sqrt2});
  CHECK(is_pointer_mixture(oracle::kron(ket_bra(plus, plus), ket_bra(zero, zero)), pointer).is_mixture);
}

TEST_CASE("mixtures of pointer-block states are always mixtures") {
  std::mt19937_64 rng(43);
  const auto pointer = parity_pointer(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix w = Matrix::Zero(8, 8);
    double total = 0.0;
    for (int a = 0; a <= 2; ++a) {
      const Matrix p = oracle::kron(Matrix::Identity(2, 2), pointer.projector(a));
      const Matrix rho = support::random_density(rng, 8);
      const double c = u(rng);
      w += c * p * rho * p;
      total += c * (p * rho * p).trace().real();
    }
    CHECK(is_pointer_mixture(w / total, pointer).is_mixture);
  }
}

TEST_CASE("Shimony check: leak threshold semantics") {
  const auto leaky = leaky_pointer_scheme(0.05);
  const auto up = StateVector::basis(2, 0);
  const auto loose = shimony_approx_check(leaky.scheme, leaky.t_init, up, 1, 0.1);
  const auto tight = shimony_approx_check(leaky.scheme, leaky.t_init, up, 1, 0.01);
  CHECK(loose.status == ShimonyStatus::pass);
  CHECK(tight.status == ShimonyStatus::fail);
  CHECK(loose.off_target_mass == doctest::Approx(0.05).epsilon(1e-12));
  double total = 0.0;
  for (const auto& [cell, a] : loose.weights) total += a;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  const auto exact = leaky_pointer_scheme(0.0);
  const auto r = shimony_approx_check(exact.scheme, exact.t_init, up, 1, 0.0);
  CHECK(r.status == ShimonyStatus::pass);
  CHECK(r.off_target_mass == 0.0);
}

TEST_CASE("Shimony check: superposed input through a pure scheme is not a mixture") {
  const auto ready = DensityMatrix::pure(StateVector::basis(2, 0));
  const MeasurementScheme cnot(pauli_z(), ready, controlled_shift(), qubit_pointer());
  const auto plus = StateVector::normalized(Vector::Constant(2, 1.0));
  const auto r = shimony_approx_check(cnot, ready, plus, 1, 0.1);
  CHECK(r.status == ShimonyStatus::not_a_mixture);
  CHECK(r.off_block_norm > 0.1);
  CHECK(std::abs(r.off_block_norm - std::sqrt(0.5)) < 1e-6);
}

TEST_CASE("A-distinctness") {
  const Matrix e0 = ket_bra(ket({1, 0}), ket({1, 0}));
  const Matrix e1 = ket_bra(ket({0, 1}), ket({0, 1}));
  CHECK_FALSE(a_distinct(e0, e0, pauli_z()));
  CHECK(a_distinct(e0, e1, pauli_z()));
  // Half-half diagonal vs the reduced Bell state: same matrix.
  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::numbers::sqrt2;
  const Matrix reduced = oracle::trace_apparatus(bell * bell.adjoint(), 2, 2);
  CHECK_FALSE(a_distinct(0.5 * Matrix::Identity(2, 2), reduced, pauli_x()));
}

TEST_CASE("Fine-Brown predicate") {
  const auto ready = DensityMatrix::pure(StateVector::basis(2, 0));
  const std::vector<Ensemble> probes{{{{1.0, StateVector::basis(2, 0)}}}, {{{1.0, StateVector::basis(2, 1)}}}};
  const auto yes = fine_brown_is_measurement(controlled_shift(), pauli_z(), pauli_z(), ready, probes);
  CHECK(yes.is_measurement);
  CHECK(yes.distinct_pairs == 1);
  const auto no = fine_brown_is_measurement(OperatorMatrix::identity(4), pauli_z(), pauli_z(), ready, probes);
  CHECK_FALSE(no.is_measurement);
  const std::vector<Ensemble> one{{{{1.0, StateVector::basis(2, 0)}}}};
  CHECK_THROWS_AS(fine_brown_is_measurement(controlled_shift(), pauli_z(), pauli_z(), ready, one),
                  ContractViolation);
}

TEST_CASE("Brown demo: superposed probe ends in a non-mixture") {
  const auto ready = DensityMatrix::pure(StateVector::basis(2, 0));
  const std::vector<Ensemble> probes{{{{1.0, StateVector::basis(2, 0)}}},
                                     {{{1.0, StateVector::basis(2, 1)}}},
                                     {{{1.0, StateVector::normalized(Vector::Constant(2, 1.0))}}}};
  const auto v = fine_brown_is_measurement(controlled_shift(), pauli_z(), pauli_z(), ready, probes);
  CHECK(v.is_measurement);
  const auto mix = is_pointer_mixture(v.finals[2], qubit_pointer());
  CHECK_FALSE(mix.is_mixture);
  CHECK(std::abs(mix.off_block_norm - std::sqrt(0.5)) < 1e-6);
}

TEST_CASE("RUE evolution acts componentwise and keeps weights") {
  const auto ready = DensityMatrix::pure(StateVector::basis(2, 0));
  const Ensemble ens{{{0.25, StateVector::basis(2, 0)}, {0.75, StateVector::basis(2, 1)}}};
  const Matrix w = rue_evolve(controlled_shift(), ens, ready);
  CHECK(std::abs(w(0, 0) - 0.25) < 1e-15);
  CHECK(std::abs(w(3, 3) - 0.75) < 1e-15);
  CHECK(is_pointer_mixture(w, qubit_pointer()).is_mixture);
}

TEST_CASE("faithful qubit schemes with superposed input never end in a mixture") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  const auto ready = DensityMatrix::pure(StateVector::basis(2, 0));
  for (int trial = 0; trial < 100; ++trial) {
    // Controlled shift dressed with random phases stays faithful.
    Matrix u = controlled_shift().matrix();
    for (int k = 0; k < 4; ++k) u.row(k) *= std::polar(1.0, ph(rng));
    const auto c = support::random_amplitudes(rng, 2);
    Vector v(2);
    v << c[0], c[1];
    const std::vector<Ensemble> probes{{{{1.0, StateVector::basis(2, 0)}}},
                                       {{{1.0, StateVector::basis(2, 1)}}},
                                       {{{1.0, StateVector::normalized(v)}}}};
    const auto verdict = fine_brown_is_measurement(OperatorMatrix(u), pauli_z(), pauli_z(), ready, probes);
    REQUIRE(verdict.is_measurement);
    CHECK_FALSE(is_pointer_mixture(verdict.finals[2], qubit_pointer()).is_mixture);
  }
}

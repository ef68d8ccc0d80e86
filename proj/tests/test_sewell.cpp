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
#include "collapse_lab/sewell.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace collapse_lab;
using namespace collapse_lab::sewell;
using qalgebra::Keep;
using qalgebra::Vector;

namespace {

SewellModel golden_model(Index cell_dim = 2, HaMode mode = HaMode::zero) {
  ObjectSpec obj({1.0, -1.0}, {0.0, 0.0}, {std::sqrt(0.3), std::sqrt(0.7)});
  PointerOptions opt;
  opt.h_a_mode = mode;
  opt.seed = 5;
  return SewellModel(obj, build_pointer_apparatus(2, cell_dim, 1.0, opt), 1.0);
}

Matrix dense_phi0(const SewellModel& m) {
  Vector psi = m.object().psi().amplitudes();
  return oracle::kron(psi * psi.adjoint(), m.apparatus().omega().matrix());
}

// Full-space picture: interacting H_S on (0, tau], free Hamiltonian after.
Matrix dense_phi(const SewellModel& m, double t) {
  const Matrix phi0 = dense_phi0(m);
  if (t <= 0.0) return phi0;
  if (t <= m.tau()) return oracle::evolve(phi0, m.h_s().matrix(), t);
  return oracle::evolve(oracle::evolve(phi0, m.h_s().matrix(), m.tau()), m.h_free().matrix(), t - m.tau());
}

const std::vector<double> kSampleFractions{0.0, 0.25, 0.5, 0.75, 1.0, 2.0};

}  // namespace

TEST_CASE("object spec rejects bad input") {
  CHECK_THROWS_AS(ObjectSpec({1.0, 1.0}, {0.0, 0.0}, {std::sqrt(0.5), std::sqrt(0.5)}), ContractViolation);
  CHECK_THROWS_AS(ObjectSpec({1.0, -1.0}, {0.0, 0.0}, {1.0, 1.0}), ContractViolation);
  CHECK_THROWS_AS(ObjectSpec({1.0}, {0.0}, {1.0}), ContractViolation);
}

TEST_CASE("pointer apparatus layout") {
  const auto app = build_pointer_apparatus(2, 1, 1.0);
  CHECK(app.dim() == 3);
  for (int a = 0; a <= 2; ++a) CHECK(app.macro().cell_dim(a) == 1);
  Matrix sum = Matrix::Zero(3, 3);
  for (int a = 0; a <= 2; ++a) {
    sum += app.macro().projector(a);
    for (int b = 0; b <= 2; ++b) {
      const Matrix prod = app.macro().projector(a) * app.macro().projector(b);
      const Matrix expect = a == b ? app.macro().projector(a) : Matrix::Zero(3, 3);
      CHECK(oracle::max_abs(prod - expect) < 1e-15);
    }
  }
  CHECK(oracle::max_abs(sum - Matrix::Identity(3, 3)) < 1e-15);
}

TEST_CASE("each coupling carries the rest cell into its own cell at tau") {
  const double tau = 0.7;
  const auto app = build_pointer_apparatus(3, 2, tau);
  for (int r = 0; r < 3; ++r) {
    const Matrix u = oracle::expm(Complex(0, tau) * app.couplings()[static_cast<std::size_t>(r)].matrix());
    const Matrix moved = u * app.omega().matrix() * u.adjoint();
    const Matrix& p = app.macro().projector(app.macro().sigma(r));
    CHECK(oracle::max_abs(p * moved * p - moved) < 1e-12);
  }
}

TEST_CASE("model invariants hold by construction") {
  std::mt19937_64 rng(21);
  for (bool commuting : {false, true}) {
    const auto m = support::random_model(rng, 3, 2, 1.3, commuting);
    CHECK(m.conservation_residual() <= 1e-12);
    CHECK(m.coupled_form_residual() <= 1e-12);
  }
}

TEST_CASE("a rest state leaking out of K_0 is rejected with its label") {
  const auto base = build_pointer_apparatus(2, 1, 1.0);
  Matrix leaky = Matrix::Zero(3, 3);
  leaky(0, 0) = 0.5;
  leaky(1, 1) = 0.5;
  try {
    ApparatusSpec(base.macro(), DensityMatrix(leaky), base.h_a(), base.couplings(), 1.0);
    FAIL("expected an invariant violation");
  } catch (const InvariantViolation& e) {
    CHECK(e.label() == "rest_state");
  }
}

TEST_CASE("blockwise propagator matches the dense exponential of H_S") {
  std::mt19937_64 rng(22);
  const auto m = support::random_model(rng, 2, 2, 1.0, true);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 4; ++k) {
    const double t = u(rng);
    const Matrix full = oracle::expm(Complex(0, t) * m.h_s().matrix());
    const Index N = m.apparatus_dim();
    for (int r = 0; r < 2; ++r) {
      CHECK(oracle::max_abs(full.block(r * N, r * N, N, N) - m.propagator(r, t)) < 1e-10);
    }
  }
}

TEST_CASE("evolve at t <= 0 returns the initial product state") {
  const auto m = golden_model();
  CHECK(oracle::max_abs(evolve(m, 0.0).phi.matrix() - dense_phi0(m)) < 1e-15);
  CHECK(oracle::max_abs(evolve(m, -2.0).phi.matrix() - dense_phi0(m)) < 1e-15);
}

TEST_CASE("factorized evolution agrees with dense evolution") {
  std::mt19937_64 rng(23);
  for (int n : {2, 3}) {
    for (Index cell : {1, 3}) {
      const auto m = support::random_model(rng, n, cell, 0.9, true);
      for (double f : kSampleFractions) {
        const double t = f * m.tau();
        CHECK(oracle::max_abs(evolve(m, t).phi.matrix() - dense_phi(m, t)) < 1e-10);
      }
    }
  }
}

TEST_CASE("serial and parallel evolution agree bitwise") {
  std::mt19937_64 rng(24);
  const auto m = support::random_model(rng, 3, 4, 1.0, true);
  for (double t : {0.3, 1.0, 1.7}) {
    CHECK(evolve(m, t, kernels::Execution::serial).phi.matrix() ==
          evolve(m, t, kernels::Execution::parallel).phi.matrix());
  }
}

TEST_CASE("trace and weight normalization along the trajectory") {
  std::mt19937_64 rng(25);
  const auto m = support::random_model(rng, 3, 2, 1.0, true);
  for (double t : {0.25, 0.5, 1.0}) {
    const auto s = evolve(m, t);
    CHECK(std::abs(s.phi.matrix().trace() - Complex(1.0)) < 1e-12);
    double total = 0.0;
    for (double w : pointer_weights(s, m.macro())) total += w;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("F coefficients at t = 0 and t = tau") {
  const auto m = golden_model();
  const auto s0 = evolve(m, 0.0);
  const auto st = evolve(m, 1.0);
  for (int r = 0; r < 2; ++r) {
    CHECK(std::abs(f_coeff(s0, m.macro(), r, r, 0) - Complex(1.0)) < 1e-15);
    for (int a = 1; a <= 2; ++a) CHECK(std::abs(f_coeff(s0, m.macro(), r, r, a)) < 1e-15);
    CHECK(std::abs(f_coeff(st, m.macro(), r, r, m.macro().sigma(r)) - Complex(1.0)) < 1e-10);
  }
}

TEST_CASE("Cauchy-Schwarz bound on F holds at random times") {
  std::mt19937_64 rng(26);
  const auto m = support::random_model(rng, 3, 2, 1.0, true);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 5; ++k) {
    const auto s = evolve(m, u(rng));
    // Direct matrices, not f_coeff, so the check is independent.
    for (int a = 0; a <= m.macro().nu(); ++a) {
      const Matrix& p = m.macro().projector(a);
      for (int r = 0; r < 3; ++r)
        for (int q = 0; q < 3; ++q) {
          const double frr = (s.omega(r, r) * p).trace().real();
          const double fqq = (s.omega(q, q) * p).trace().real();
          const double frq = std::abs((s.omega(r, q) * p).trace());
          CHECK(frr * fqq - frq * frq >= -1e-12);
        }
    }
  }
}

TEST_CASE("expectation decomposes over F coefficients") {
  std::mt19937_64 rng(27);
  const auto m = support::random_model(rng, 3, 2, 1.0, false);
  const auto o = m.object().observable();
  for (double t : {0.2, 0.6, 1.0, 1.5}) {
    const auto s = evolve(m, t);
    for (int a = 0; a <= m.macro().nu(); ++a) {
      double eam = 0.0, w = 0.0;
      for (int r = 0; r < 3; ++r) {
        const double c2 = std::norm(m.object().amplitudes()[static_cast<std::size_t>(r)]);
        const double f = f_coeff(s, m.macro(), r, r, a).real();
        eam += c2 * m.object().lambdas()[static_cast<std::size_t>(r)] * f;
        w += c2 * f;
      }
      const auto pa = OperatorMatrix(m.macro().projector(a));
      CHECK(std::abs(expectation(s, o, pa, m.macro()) - eam) < 1e-10);
      CHECK(std::abs(pointer_weights(s, m.macro())[static_cast<std::size_t>(a)] - w) < 1e-10);
    }
  }
}

TEST_CASE("expectation rejects operators outside the pointer algebra") {
  const auto m = golden_model();
  const auto s = evolve(m, 0.5);
  Matrix off = Matrix::Zero(m.apparatus_dim(), m.apparatus_dim());
  off(0, 2) = off(2, 0) = 1.0;
  CHECK_THROWS_AS(expectation(s, m.object().observable(), OperatorMatrix(off), m.macro()), ContractViolation);
}

TEST_CASE("unconditional expectation is conserved") {
  std::mt19937_64 rng(28);
  const auto m = support::random_model(rng, 4, 2, 1.0, true);
  double e0 = 0.0;
  for (int r = 0; r < 4; ++r) {
    e0 += m.object().lambdas()[static_cast<std::size_t>(r)] *
          std::norm(m.object().amplitudes()[static_cast<std::size_t>(r)]);
  }
  for (double f : kSampleFractions) {
    CHECK(std::abs(object_expectation(evolve(m, f), m.object().observable()) - e0) < 1e-10);
  }
}

TEST_CASE("conditional expectation: normalization, identity and dual route") {
  std::mt19937_64 rng(29);
  const auto m = support::random_model(rng, 3, 2, 1.0, true);
  const auto o = m.object().observable();
  const auto id = OperatorMatrix::identity(3);
  for (double t : {0.4, 1.0}) {
    const auto s = evolve(m, t);
    for (const auto& ce : conditional_expectation(s, id, m.macro())) {
      if (ce.value) CHECK(*ce.value == doctest::Approx(1.0).epsilon(1e-12));
    }
    const auto ratio = conditional_expectation(s, o, m.macro());
    const auto via = conditional_expectation_via_identity(s, o, m.macro());
    for (std::size_t a = 0; a < ratio.size(); ++a) {
      REQUIRE(ratio[a].value.has_value() == via[a].value.has_value());
      if (ratio[a].value) CHECK(std::abs(*ratio[a].value - *via[a].value) < 1e-10);
    }
    // E(E(O|M) M) = E(O (x) M) for random algebra elements.
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 10; ++k) {
      Matrix mm = Matrix::Zero(m.apparatus_dim(), m.apparatus_dim());
      double lhs = 0.0;
      const auto w = pointer_weights(s, m.macro());
      for (int a = 0; a <= m.macro().nu(); ++a) {
        const double coef = u(rng);
        mm += coef * m.macro().projector(a);
        if (ratio[static_cast<std::size_t>(a)].value) lhs += *ratio[static_cast<std::size_t>(a)].value * coef * w[static_cast<std::size_t>(a)];
      }
      CHECK(std::abs(lhs - expectation(s, o, OperatorMatrix(mm), m.macro())) < 1e-10);
    }
  }
}

TEST_CASE("empty cells are reported as undefined") {
  const auto m = golden_model();
  const auto ce = conditional_expectation(evolve(m, 1.0), m.object().observable(), m.macro());
  CHECK_FALSE(ce[0].value.has_value());
  CHECK(ce[1].value.has_value());
}

TEST_CASE("measurement conditions pass for the canonical apparatus") {
  std::mt19937_64 rng(30);
  const auto m = support::random_model(rng, 3, 2, 1.0, true);
  const auto rep = verify_measurement_conditions(m);
  CHECK(rep.pass);
  CHECK(rep.max_residual <= 1e-12);
  CHECK(rep.max_cross <= 1e-10);
}

TEST_CASE("measurement conditions fail without coupling") {
  const auto base = build_pointer_apparatus(2, 2, 1.0);
  std::vector<OperatorMatrix> zero(2, OperatorMatrix::zero(base.dim()));
  const SewellModel m(ObjectSpec({1.0, -1.0}, {0.0, 0.0}, {std::sqrt(0.5), std::sqrt(0.5)}),
                      base.with_couplings(zero), 1.0);
  CHECK_FALSE(verify_measurement_conditions(m).pass);
  CHECK_THROWS_AS(collapse_report(m), ContractViolation);
  // Uncoupled apparatus evolves on its own: every block is the same.
  const auto s = evolve(m, 0.6);
  CHECK(oracle::max_abs(s.omega(0, 1) - s.omega(0, 0)) < 1e-14);
}

TEST_CASE("golden collapse values") {
  for (HaMode mode : {HaMode::zero, HaMode::cell_commuting}) {
    const auto rep = collapse_report(golden_model(2, mode));
    CHECK(rep.expectation == doctest::Approx(-0.4).epsilon(1e-12));
    REQUIRE(rep.conditional[1].value);
    REQUIRE(rep.conditional[2].value);
    CHECK(std::abs(*rep.conditional[1].value - 1.0) < 1e-10);
    CHECK(std::abs(*rep.conditional[2].value + 1.0) < 1e-10);
    CHECK(std::abs(rep.weights[1] - 0.3) < 1e-10);
    CHECK(std::abs(rep.weights[2] - 0.7) < 1e-10);
    CHECK_FALSE(rep.eigen_input.has_value());
  }
}

TEST_CASE("eigenstate input leaves the object in its eigenstate") {
  ObjectSpec obj({2.0, -1.0, 0.5}, {0.1, 0.2, 0.3}, {0.0, Complex(0.0, 1.0), 0.0});
  const SewellModel m(obj, build_pointer_apparatus(3, 2, 1.0), 1.0);
  const auto rep = collapse_report(m);
  REQUIRE(rep.eigen_input);
  CHECK(*rep.eigen_input == 1);
  CHECK(rep.eigen_object_residual <= 1e-12);
  CHECK(rep.eigen_state_residual <= 1e-12);
}

TEST_CASE("two-stage measurement matches the triple-space oracle") {
  std::mt19937_64 rng(31);
  const auto m = support::random_model(rng, 2, 1, 0.8, false);
  PointerOptions opt2;
  opt2.h_a_mode = HaMode::cell_commuting;
  opt2.seed = 9;
  const auto second = build_pointer_apparatus(2, 2, 1.1, opt2);
  const auto rep = two_stage_measurement(m, second);

  // Dense evolution on object (x) app1 (x) app2 with each stage's Hamiltonian.
  const Index n = 2, n1 = m.apparatus_dim(), n2 = second.dim();
  const Matrix i_o = Matrix::Identity(n, n), i1 = Matrix::Identity(n1, n1), i2 = Matrix::Identity(n2, n2);
  const Matrix h_o = m.object().hamiltonian().matrix();
  Matrix h_free = oracle::kron(oracle::kron(h_o, i1), i2) +
                  oracle::kron(oracle::kron(i_o, m.apparatus().h_a().matrix()), i2) +
                  oracle::kron(oracle::kron(i_o, i1), second.h_a().matrix());
  Matrix h1 = h_free, h2 = h_free;
  for (int r = 0; r < 2; ++r) {
    Matrix pr = Matrix::Zero(n, n);
    pr(r, r) = 1.0;
    h1 += oracle::kron(oracle::kron(pr, m.apparatus().couplings()[static_cast<std::size_t>(r)].matrix()), i2);
    h2 += oracle::kron(oracle::kron(pr, i1), second.couplings()[static_cast<std::size_t>(r)].matrix());
  }
  Vector psi = m.object().psi().amplitudes();
  const Matrix phi0 = oracle::kron(oracle::kron(psi * psi.adjoint(), m.apparatus().omega().matrix()),
                                   second.omega().matrix());
  const Matrix phi = oracle::evolve(oracle::evolve(phi0, h1, m.tau()), h2, second.tau());
  const Matrix app = oracle::trace_object(phi, n, n1 * n2);
  for (int a1 = 0; a1 <= 2; ++a1)
    for (int a2 = 0; a2 <= 2; ++a2) {
      const Matrix cell = oracle::kron(m.macro().projector(a1), second.macro().projector(a2));
      CHECK(std::abs((app * cell).trace().real() - rep.joint(a1, a2)) < 1e-10);
    }
  CHECK(rep.off_diagonal_mass <= 1e-10);
  for (int r = 0; r < 2; ++r) {
    CHECK(std::abs(rep.diagonal[static_cast<std::size_t>(r)] -
                   std::norm(m.object().amplitudes()[static_cast<std::size_t>(r)])) < 1e-10);
  }
  for (int a1 = 0; a1 <= 2; ++a1) {
    CHECK(std::abs(rep.joint.row(a1).sum() - rep.first_stage_weights[static_cast<std::size_t>(a1)]) < 1e-10);
  }
}

TEST_CASE("two-stage with eigenstate input is certain") {
  ObjectSpec obj({1.0, -1.0}, {0.0, 0.0}, {0.0, 1.0});
  const SewellModel m(obj, build_pointer_apparatus(2, 1, 1.0), 1.0);
  const auto rep = two_stage_measurement(m, build_pointer_apparatus(2, 1, 0.5));
  CHECK(rep.joint(2, 2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-stage refuses triple spaces beyond capacity") {
  ObjectSpec obj({1.0, -1.0}, {0.0, 0.0}, {std::sqrt(0.5), std::sqrt(0.5)});
  const SewellModel m(obj, build_pointer_apparatus(2, 30, 1.0), 1.0);
  CHECK_THROWS_AS(two_stage_measurement(m, build_pointer_apparatus(2, 30, 1.0)), CapacityError);
}

TEST_CASE("reverse evolution restores the apparatus but not the superposition") {
  for (int j : {0, 1}) {
    ObjectSpec obj({1.0, -1.0}, {0.3, -0.2}, {std::sqrt(0.5), std::sqrt(0.5)});
    PointerOptions opt;
    opt.h_a_mode = HaMode::cell_commuting;
    opt.seed = 3;
    const SewellModel m(obj, build_pointer_apparatus(2, 2, 1.0, opt), 1.0);
    const auto rep = reverse_evolution(m, j);
    CHECK(rep.apparatus_distance <= 1e-10);
    CHECK(rep.object_distance_to_eigenstate <= 1e-10);
    CHECK(std::abs(rep.object_distance_to_initial - 1.0 / std::numbers::sqrt2) <= 1e-10);
    CHECK(rep.full_distance_to_initial >= 0.1);
    const Matrix app = oracle::trace_object(rep.reversed.matrix(), 2, m.apparatus_dim());
    CHECK(oracle::max_abs(app - m.apparatus().omega().matrix()) < 1e-10);
  }
}

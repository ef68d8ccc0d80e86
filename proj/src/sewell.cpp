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

#include "collapse_lab/sewell.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/rng.hpp"

namespace collapse_lab::sewell {

using qalgebra::max_norm;

namespace {

constexpr double kStructuralTol = 1e-12;

// tr(a b) without forming the product.
Complex trace_product(const Matrix& a, const Matrix& b) {
  return (a.cwiseProduct(b.transpose())).sum();
}

Matrix block(const Matrix& m, Index r, Index s, Index N) { return m.block(r * N, s * N, N, N); }

}  // namespace

// ---------------------------------------------------------------- ObjectSpec

ObjectSpec::ObjectSpec(std::vector<double> lambdas, std::vector<double> energies,
                       std::vector<Complex> amplitudes)
    : lambdas_(std::move(lambdas)), energies_(std::move(energies)),
      amplitudes_(std::move(amplitudes)) {
  const auto n = lambdas_.size();
  if (n < 2 || n > 16) throw ContractViolation("object dimension must be in [2, 16]");
  if (energies_.size() != n || amplitudes_.size() != n) {
    throw ShapeError("lambdas, energies and amplitudes must all have length n");
  }
  double norm2 = 0.0;
  for (const auto& c : amplitudes_) norm2 += std::norm(c);
  if (std::abs(norm2 - 1.0) > kTol.norm) {
    throw ContractViolation("amplitudes not normalized: sum |c_r|^2 = " + std::to_string(norm2));
  }
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t s = r + 1; s < n; ++s) {
      if (std::abs(lambdas_[r] - lambdas_[s]) <= kStructuralTol) {
        throw ContractViolation("eigenvalues of O must be pairwise distinct (r=" +
                                std::to_string(r) + ", s=" + std::to_string(s) + ")");
      }
    }
  }
}

StateVector ObjectSpec::psi() const {
  qalgebra::Vector v(n());
  for (Index r = 0; r < n(); ++r) v(r) = amplitudes_[static_cast<std::size_t>(r)];
  return StateVector(std::move(v));
}

OperatorMatrix ObjectSpec::observable() const { return OperatorMatrix::diagonal(lambdas_); }

OperatorMatrix ObjectSpec::hamiltonian() const { return OperatorMatrix::diagonal(energies_); }

// -------------------------------------------------------------- MacroAlgebra

MacroAlgebra::MacroAlgebra(std::vector<Matrix> projectors, std::vector<double> pointer_values,
                           std::vector<int> sigma)
    : projectors_(std::move(projectors)), pointer_values_(std::move(pointer_values)),
      sigma_(std::move(sigma)) {
  if (projectors_.size() < 2) throw ContractViolation("need a rest cell and at least one live cell");
  const Index dim = projectors_.front().rows();
  Matrix sum = Matrix::Zero(dim, dim);
  for (const auto& p : projectors_) {
    if (p.rows() != dim || p.cols() != dim) throw ShapeError("cell projectors differ in shape");
    if (max_norm(p - p.adjoint()) > kTol.projector || max_norm(p * p - p) > kTol.projector) {
      throw InvariantViolation("pointer_resolution", max_norm(p * p - p),
                               "cell projector is not an orthogonal projector");
    }
    ranks_.push_back(static_cast<Index>(std::llround(p.trace().real())));
    sum += p;
  }
  const double sum_residual = max_norm(sum - Matrix::Identity(dim, dim));
  if (sum_residual > kTol.projector) {
    throw InvariantViolation("pointer_resolution", sum_residual,
                             "cell projectors do not sum to the identity");
  }
  for (std::size_t a = 0; a < projectors_.size(); ++a) {
    for (std::size_t b = a + 1; b < projectors_.size(); ++b) {
      const double overlap = max_norm(projectors_[a] * projectors_[b]);
      if (overlap > kTol.projector) {
        throw InvariantViolation("pointer_resolution", overlap, "cell projectors overlap");
      }
    }
  }
  if (pointer_values_.size() != projectors_.size() - 1) {
    throw ShapeError("need one pointer value per live cell");
  }
  std::set<int> seen;
  for (int s : sigma_) {
    if (s < 1 || s > nu()) throw ContractViolation("sigma must map into live cells 1..nu");
    if (!seen.insert(s).second) throw ContractViolation("sigma must be injective");
  }
}

MacroAlgebra MacroAlgebra::uniform_cells(int nu, Index cell_dim, std::vector<int> sigma) {
  if (nu < 1 || cell_dim < 1) throw ContractViolation("uniform_cells: nu >= 1, cell_dim >= 1");
  const Index dim = (nu + 1) * cell_dim;
  if (dim > kMaxDim) throw CapacityError("apparatus dimension exceeds capacity");
  std::vector<Matrix> projectors;
  std::vector<double> values;
  for (int a = 0; a <= nu; ++a) {
    Matrix p = Matrix::Zero(dim, dim);
    p.block(a * cell_dim, a * cell_dim, cell_dim, cell_dim).setIdentity();
    projectors.push_back(std::move(p));
    if (a > 0) values.push_back(static_cast<double>(a));
  }
  return MacroAlgebra(std::move(projectors), std::move(values), std::move(sigma));
}

const Matrix& MacroAlgebra::projector(int alpha) const {
  if (alpha < 0 || alpha > nu()) throw ContractViolation("cell index out of range");
  return projectors_[static_cast<std::size_t>(alpha)];
}

Index MacroAlgebra::cell_dim(int alpha) const {
  if (alpha < 0 || alpha > nu()) throw ContractViolation("cell index out of range");
  return ranks_[static_cast<std::size_t>(alpha)];
}

double MacroAlgebra::pointer_value(int alpha) const {
  if (alpha < 1 || alpha > nu()) throw ContractViolation("pointer values exist for cells 1..nu");
  return pointer_values_[static_cast<std::size_t>(alpha - 1)];
}

int MacroAlgebra::sigma(int r) const {
  if (r < 0 || r >= object_dim()) throw ContractViolation("object eigenindex out of range");
  return sigma_[static_cast<std::size_t>(r)];
}

std::optional<int> MacroAlgebra::sigma_inverse(int alpha) const {
  for (int r = 0; r < object_dim(); ++r) {
    if (sigma_[static_cast<std::size_t>(r)] == alpha) return r;
  }
  return std::nullopt;
}

Matrix MacroAlgebra::observable() const {
  Matrix m = Matrix::Zero(dim(), dim());
  for (int a = 1; a <= nu(); ++a) m += pointer_value(a) * projector(a);
  return m;
}

std::pair<std::vector<double>, double> MacroAlgebra::decompose(const Matrix& m) const {
  if (m.rows() != dim() || m.cols() != dim()) throw ShapeError("decompose: dimension mismatch");
  std::vector<double> coeffs;
  Matrix rebuilt = Matrix::Zero(dim(), dim());
  for (int a = 0; a <= nu(); ++a) {
    const Index rank = cell_dim(a);
    const double c = rank == 0 ? 0.0 : trace_product(projector(a), m).real() / static_cast<double>(rank);
    coeffs.push_back(c);
    rebuilt += c * projector(a);
  }
  return {std::move(coeffs), max_norm(m - rebuilt)};
}

// ------------------------------------------------------------- ApparatusSpec

ApparatusSpec::ApparatusSpec(MacroAlgebra macro, DensityMatrix omega, OperatorMatrix h_a,
                             std::vector<OperatorMatrix> couplings, double tau)
    : macro_(std::move(macro)), omega_(std::move(omega)), h_a_(std::move(h_a)),
      couplings_(std::move(couplings)), tau_(tau) {
  const Index N = macro_.dim();
  if (omega_.dim() != N || h_a_.dim() != N) throw ShapeError("apparatus operators differ in dimension");
  if (!(tau_ > 0.0)) throw ContractViolation("coupling window tau must be positive");
  if (!h_a_.is_hermitian()) throw ContractViolation("apparatus Hamiltonian must be Hermitian");
  if (static_cast<int>(couplings_.size()) != macro_.object_dim()) {
    throw ShapeError("need one coupling V_r per object eigenstate");
  }
  for (const auto& v : couplings_) {
    if (v.dim() != N) throw ShapeError("coupling dimension differs from apparatus dimension");
    if (!v.is_hermitian()) {
      throw InvariantViolation("conserving_coupling", v.hermiticity_residual(),
                               "coupling V_r is not Hermitian");
    }
  }
  const Matrix& p0 = macro_.projector(0);
  const double rest = max_norm(p0 * omega_.matrix() * p0 - omega_.matrix());
  if (rest > kStructuralTol) {
    throw InvariantViolation("rest_state", rest, "Omega is not supported in the rest cell K_0");
  }
}

ApparatusSpec ApparatusSpec::with_couplings(std::vector<OperatorMatrix> couplings) const {
  return ApparatusSpec(macro_, omega_, h_a_, std::move(couplings), tau_);
}

ApparatusSpec build_pointer_apparatus(int n, Index cell_dim, double tau,
                                      const PointerOptions& options) {
  if (n < 2) throw ContractViolation("pointer apparatus needs n >= 2");
  if (cell_dim < 1) throw ContractViolation("cell_dim must be >= 1");
  if (!(tau > 0.0)) throw ContractViolation("tau must be positive");
  std::vector<int> sigma(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) sigma[static_cast<std::size_t>(r)] = r + 1;
  MacroAlgebra macro = MacroAlgebra::uniform_cells(n, cell_dim, sigma);
  const Index N = macro.dim();

  // Rest state.
  Matrix omega = Matrix::Zero(N, N);
  if (options.rest_spectrum.empty()) {
    omega.topLeftCorner(cell_dim, cell_dim).setIdentity();
    omega /= static_cast<double>(cell_dim);
  } else {
    if (static_cast<Index>(options.rest_spectrum.size()) != cell_dim) {
      throw ShapeError("rest_spectrum must have cell_dim entries");
    }
    for (Index k = 0; k < cell_dim; ++k) {
      omega(k, k) = options.rest_spectrum[static_cast<std::size_t>(k)];
    }
  }

  Matrix h_a = Matrix::Zero(N, N);
  if (options.h_a_mode == HaMode::cell_commuting) {
    // I_cells (x) A with A Hermitian on the intra-cell index commutes with
    // every Pi_alpha and every swap generator.
    auto rng = make_rng(options.seed, "pointer.h_a");
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix a(cell_dim, cell_dim);
    for (Index i = 0; i < cell_dim; ++i)
      for (Index j = 0; j < cell_dim; ++j) a(i, j) = Complex(gauss(rng), gauss(rng));
    a = 0.5 * (a + a.adjoint()).eval();
    h_a = kernels::kron(Matrix::Identity(n + 1, n + 1), a);
  }

  const double angle_rate = std::numbers::pi / (2.0 * tau);
  std::vector<OperatorMatrix> couplings;
  for (int r = 0; r < n; ++r) {
    const Index cell = sigma[static_cast<std::size_t>(r)];
    Matrix g = Matrix::Zero(N, N);
    for (Index k = 0; k < cell_dim; ++k) {
      g(k, cell * cell_dim + k) = 1.0;
      g(cell * cell_dim + k, k) = 1.0;
    }
    couplings.emplace_back(angle_rate * g);
  }
  return ApparatusSpec(std::move(macro), DensityMatrix(std::move(omega)),
                       OperatorMatrix(std::move(h_a)), std::move(couplings), tau);
}

// --------------------------------------------------------------- SewellModel

SewellModel::SewellModel(ObjectSpec object, ApparatusSpec apparatus, double tau)
    : object_(std::move(object)), apparatus_(std::move(apparatus)), tau_(tau),
      h_s_(OperatorMatrix::zero(1)) {
  if (!(tau_ > 0.0)) throw ContractViolation("tau must be positive");
  if (apparatus_.macro().object_dim() != n()) {
    throw ShapeError("sigma must be defined for every object eigenindex");
  }
  const Index N = apparatus_dim();
  if (dim() > kMaxDim) throw CapacityError("composite dimension exceeds capacity");

  const Matrix id = Matrix::Identity(N, N);
  Matrix hs = Matrix::Zero(dim(), dim());
  for (int r = 0; r < n(); ++r) {
    const double eps = object_.energies()[static_cast<std::size_t>(r)];
    Matrix k = apparatus_.h_a().matrix() + apparatus_.couplings()[static_cast<std::size_t>(r)].matrix() + eps * id;
    hs.block(r * N, r * N, N, N) = k;
    k_ops_.emplace_back(std::move(k));
    k_spectra_.emplace_back(k_ops_.back());
    free_spectra_.emplace_back(OperatorMatrix(Matrix(apparatus_.h_a().matrix() + eps * id)));
  }
  h_s_ = OperatorMatrix(std::move(hs));

  const Matrix o_full = kernels::kron(object_.observable().matrix(), id);
  conservation_residual_ = max_norm(qalgebra::commutator(o_full, h_s_.matrix()));
  if (conservation_residual_ > kStructuralTol) {
    throw InvariantViolation("conservation", conservation_residual_, "[O (x) I, H_S] != 0");
  }

  Matrix coupled = h_free().matrix();
  for (int r = 0; r < n(); ++r) {
    const Matrix pr = qalgebra::projector_onto(StateVector::basis(n(), r)).matrix();
    coupled += kernels::kron(pr, apparatus_.couplings()[static_cast<std::size_t>(r)].matrix());
  }
  coupled_form_residual_ = max_norm(coupled - h_s_.matrix());
  if (coupled_form_residual_ > kStructuralTol) {
    throw InvariantViolation("coupled_form", coupled_form_residual_,
                             "block form of H_S disagrees with free + interaction form");
  }
}

OperatorMatrix SewellModel::h_free() const {
  const Index N = apparatus_dim();
  return OperatorMatrix(
      Matrix(kernels::kron(object_.hamiltonian().matrix(), Matrix::Identity(N, N)) +
             kernels::kron(Matrix::Identity(n(), n()), apparatus_.h_a().matrix())));
}

Matrix SewellModel::propagator(int r, double t) const {
  return k_spectra_.at(static_cast<std::size_t>(r)).exp_i(t);
}

Matrix SewellModel::free_propagator(int r, double t) const {
  return free_spectra_.at(static_cast<std::size_t>(r)).exp_i(t);
}

// ------------------------------------------------------------------ evolve

EvolvedState evolve(const SewellModel& model, double t, kernels::Execution ex) {
  const Index n = model.n();
  const Matrix& omega0 = model.apparatus().omega().matrix();
  std::vector<Matrix> blocks(static_cast<std::size_t>(n * n));

  if (t <= 0.0) {
    for (auto& b : blocks) b = omega0;
  } else {
    const double t_int = std::min(t, model.tau());
    std::vector<Matrix> u(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) u[static_cast<std::size_t>(r)] = model.propagator(r, t_int);
    if (t > model.tau()) {
      for (int r = 0; r < n; ++r) {
        u[static_cast<std::size_t>(r)] = u[static_cast<std::size_t>(r)] * model.free_propagator(r, t - model.tau());
      }
    }
    for (int r = 0; r < n; ++r) {
      const Matrix left = u[static_cast<std::size_t>(r)].adjoint() * omega0;
      for (int s = 0; s < n; ++s) {
        blocks[static_cast<std::size_t>(r * n + s)] = left * u[static_cast<std::size_t>(s)];
      }
    }
  }
  const auto& c = model.object().amplitudes();
  Matrix phi = kernels::assemble_blocks(c, blocks, ex);
  return EvolvedState{t, n, DensityMatrix(std::move(phi)), std::move(blocks)};
}

// ---------------------------------------------------------- expectations

Complex f_coeff(const EvolvedState& state, const MacroAlgebra& macro, int r, int s, int alpha) {
  if (r < 0 || s < 0 || r >= state.n || s >= state.n) {
    throw ContractViolation("f_coeff: object index out of range");
  }
  return trace_product(state.omega(r, s), macro.projector(alpha));
}

namespace {

// tr[Phi (o (x) m)] using the block structure of Phi.
Complex block_expectation(const EvolvedState& state, const Matrix& o, const Matrix& m) {
  const Index n = state.n;
  const Index N = state.phi.dim() / n;
  const Matrix& phi = state.phi.matrix();
  Complex acc = 0.0;
  for (Index r = 0; r < n; ++r) {
    for (Index s = 0; s < n; ++s) {
      if (o(s, r) == Complex(0.0)) continue;
      acc += o(s, r) * trace_product(block(phi, r, s, N), m);
    }
  }
  return acc;
}

void require_object_operator(const EvolvedState& state, const OperatorMatrix& o) {
  if (o.dim() != state.n) throw ShapeError("object operator has the wrong dimension");
  if (!o.is_hermitian()) throw ContractViolation("object observable must be Hermitian");
}

}  // namespace

double expectation(const EvolvedState& state, const OperatorMatrix& o, const OperatorMatrix& m,
                   const MacroAlgebra& macro) {
  require_object_operator(state, o);
  if (m.dim() != macro.dim()) throw ShapeError("apparatus operator has the wrong dimension");
  const auto [coeffs, residual] = macro.decompose(m.matrix());
  if (residual > kTol.projector) {
    throw ContractViolation("operator is not in the pointer algebra (residual " +
                            std::to_string(residual) + ")");
  }
  return block_expectation(state, o.matrix(), m.matrix()).real();
}

double object_expectation(const EvolvedState& state, const OperatorMatrix& o) {
  require_object_operator(state, o);
  const Index N = state.phi.dim() / state.n;
  return block_expectation(state, o.matrix(), Matrix::Identity(N, N)).real();
}

std::vector<double> pointer_weights(const EvolvedState& state, const MacroAlgebra& macro) {
  const Matrix id = Matrix::Identity(state.n, state.n);
  std::vector<double> w;
  for (int a = 0; a <= macro.nu(); ++a) {
    w.push_back(block_expectation(state, id, macro.projector(a)).real());
  }
  return w;
}

std::vector<CellExpectation> conditional_expectation(const EvolvedState& state,
                                                     const OperatorMatrix& o,
                                                     const MacroAlgebra& macro, double w_floor) {
  require_object_operator(state, o);
  const auto w = pointer_weights(state, macro);
  std::vector<CellExpectation> out;
  for (int a = 0; a <= macro.nu(); ++a) {
    CellExpectation ce{a, w[static_cast<std::size_t>(a)], std::nullopt};
    if (ce.weight > w_floor) {
      ce.value = block_expectation(state, o.matrix(), macro.projector(a)).real() / ce.weight;
    }
    out.push_back(ce);
  }
  return out;
}

std::vector<CellExpectation> conditional_expectation_via_identity(const EvolvedState& state,
                                                                  const OperatorMatrix& o,
                                                                  const MacroAlgebra& macro,
                                                                  double w_floor) {
  require_object_operator(state, o);
  const auto w = pointer_weights(state, macro);
  std::vector<int> live;
  for (int a = 0; a <= macro.nu(); ++a) {
    if (w[static_cast<std::size_t>(a)] > w_floor) live.push_back(a);
  }

  // Test elements M_j = sum_alpha m_{j,alpha} Pi_alpha with fixed random
  // coefficients; two more than the algebra dimension for a proper
  // least-squares fit.
  const int cells = macro.nu() + 1;
  const int tests = cells + 2;
  auto rng = make_rng(0, "sewell.identity_test_elements");
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const Matrix id_obj = Matrix::Identity(state.n, state.n);

  Eigen::MatrixXcd a(tests, static_cast<Index>(live.size()));
  Eigen::VectorXcd b(tests);
  for (int j = 0; j < tests; ++j) {
    Matrix mj = Matrix::Zero(macro.dim(), macro.dim());
    for (int al = 0; al < cells; ++al) mj += coef(rng) * macro.projector(al);
    for (std::size_t k = 0; k < live.size(); ++k) {
      a(j, static_cast<Index>(k)) = block_expectation(state, id_obj, macro.projector(live[k]) * mj);
    }
    b(j) = block_expectation(state, o.matrix(), mj);
  }
  Eigen::VectorXcd f = live.empty() ? Eigen::VectorXcd() : Eigen::VectorXcd(a.colPivHouseholderQr().solve(b));

  std::vector<CellExpectation> out;
  for (int al = 0; al < cells; ++al) out.push_back({al, w[static_cast<std::size_t>(al)], std::nullopt});
  for (std::size_t k = 0; k < live.size(); ++k) {
    out[static_cast<std::size_t>(live[k])].value = f(static_cast<Index>(k)).real();
  }
  return out;
}

// ------------------------------------------------------------------ reports

MeasurementConditionsReport verify_measurement_conditions(const SewellModel& model,
                                                          double cond_tol) {
  const auto state = evolve(model, model.tau());
  const auto& macro = model.macro();
  MeasurementConditionsReport rep;
  rep.cond_tol = cond_tol;
  rep.residuals = Eigen::MatrixXd::Zero(model.n(), macro.nu() + 1);
  for (int r = 0; r < model.n(); ++r) {
    for (int b = 0; b <= macro.nu(); ++b) {
      const double target = macro.sigma(r) == b ? 1.0 : 0.0;
      const double res = f_coeff(state, macro, r, r, b).real() - target;
      rep.residuals(r, b) = res;
      rep.max_residual = std::max(rep.max_residual, std::abs(res));
    }
    for (int s = 0; s < model.n(); ++s) {
      if (s == r) continue;
      for (int b = 0; b <= macro.nu(); ++b) {
        rep.max_cross = std::max(rep.max_cross, std::abs(f_coeff(state, macro, r, s, b)));
      }
    }
  }
  rep.pass = rep.max_residual <= cond_tol;
  return rep;
}

CollapseReport collapse_report(const SewellModel& model) {
  const auto cond = verify_measurement_conditions(model);
  if (!cond.pass) {
    throw ContractViolation("collapse_report needs the measurement conditions to hold (max residual " +
                            std::to_string(cond.max_residual) + ")");
  }
  const auto state = evolve(model, model.tau());
  const auto& macro = model.macro();
  const auto& obj = model.object();
  const auto o = obj.observable();

  CollapseReport rep;
  rep.expectation = object_expectation(state, o);
  for (int r = 0; r < obj.n(); ++r) {
    rep.predicted_expectation +=
        obj.lambdas()[static_cast<std::size_t>(r)] * std::norm(obj.amplitudes()[static_cast<std::size_t>(r)]);
  }
  rep.conditional = conditional_expectation(state, o, macro);
  rep.weights = pointer_weights(state, macro);
  for (int a = 0; a <= macro.nu(); ++a) {
    const auto r = macro.sigma_inverse(a);
    const double predicted = r ? std::norm(obj.amplitudes()[static_cast<std::size_t>(*r)]) : 0.0;
    rep.predicted_weights.push_back(predicted);
    rep.max_weight_residual =
        std::max(rep.max_weight_residual, std::abs(rep.weights[static_cast<std::size_t>(a)] - predicted));
    const auto& ce = rep.conditional[static_cast<std::size_t>(a)];
    if (ce.value && r) {
      rep.max_conditional_residual = std::max(
          rep.max_conditional_residual, std::abs(*ce.value - obj.lambdas()[static_cast<std::size_t>(*r)]));
    }
  }

  for (int k = 0; k < obj.n(); ++k) {
    if (std::abs(std::abs(obj.amplitudes()[static_cast<std::size_t>(k)]) - 1.0) <= kTol.norm) {
      rep.eigen_input = k;
      const Matrix pk = qalgebra::projector_onto(StateVector::basis(obj.n(), k)).matrix();
      const Matrix expected = kernels::kron(pk, state.omega(k, k));
      rep.eigen_state_residual = max_norm(state.phi.matrix() - expected);
      const auto reduced = qalgebra::partial_trace(state.phi, obj.n(), model.apparatus_dim(),
                                                   qalgebra::Keep::object);
      rep.eigen_object_residual = max_norm(reduced.matrix() - pk);
      break;
    }
  }
  return rep;
}

TwoStageReport two_stage_measurement(const SewellModel& model, const ApparatusSpec& second) {
  if (!verify_measurement_conditions(model).pass) {
    throw ContractViolation("first apparatus does not satisfy the measurement conditions");
  }
  const SewellModel model2(model.object(), second, second.tau());
  if (!verify_measurement_conditions(model2).pass) {
    throw ContractViolation("second apparatus does not satisfy the measurement conditions");
  }
  const Index n = model.n();
  const Index n1 = model.apparatus_dim();
  const Index n2 = second.dim();
  if (n * n1 * n2 > kMaxDim) {
    throw CapacityError("triple space dimension " + std::to_string(n * n1 * n2) + " exceeds " +
                        std::to_string(kMaxDim));
  }
  const double tau1 = model.tau();
  const double tau2 = second.tau();
  const qalgebra::SpectralDecomposition ha1(model.apparatus().h_a());
  const qalgebra::SpectralDecomposition ha2(second.h_a());
  const Matrix idle2 = ha2.exp_i(tau1);  // app2 runs freely during stage 1
  const Matrix idle1 = ha1.exp_i(tau2);  // app1 runs freely during stage 2

  // Block propagator T_r = (U1_r(tau1) (x) e^{i H_a2 tau1}) (e^{i H_a1 tau2} (x) U2_r(tau2)),
  // with eps_r carried once, by the first factor of each stage.
  std::vector<Matrix> t(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    const Matrix stage1 = kernels::kron(model.propagator(r, tau1), idle2);
    const Matrix stage2 = kernels::kron(idle1, model2.propagator(r, tau2));
    t[static_cast<std::size_t>(r)] = stage1 * stage2;
  }
  const Matrix omega0 =
      kernels::kron(model.apparatus().omega().matrix(), second.omega().matrix());
  std::vector<Matrix> blocks(static_cast<std::size_t>(n * n));
  for (int r = 0; r < n; ++r) {
    const Matrix left = t[static_cast<std::size_t>(r)].adjoint() * omega0;
    for (int s = 0; s < n; ++s) blocks[static_cast<std::size_t>(r * n + s)] = left * t[static_cast<std::size_t>(s)];
  }
  const DensityMatrix phi(kernels::assemble_blocks(model.object().amplitudes(), blocks));

  const auto& m1 = model.macro();
  const auto& m2 = second.macro();
  TwoStageReport rep;
  rep.triple_dim = n * n1 * n2;
  rep.joint = Eigen::MatrixXd::Zero(m1.nu() + 1, m2.nu() + 1);
  const Index napp = n1 * n2;
  for (int a1 = 0; a1 <= m1.nu(); ++a1) {
    for (int a2 = 0; a2 <= m2.nu(); ++a2) {
      const Matrix cell = kernels::kron(m1.projector(a1), m2.projector(a2));
      Complex acc = 0.0;
      for (Index r = 0; r < n; ++r) acc += trace_product(block(phi.matrix(), r, r, napp), cell);
      rep.joint(a1, a2) = acc.real();
    }
  }
  for (int a1 = 0; a1 <= m1.nu(); ++a1) {
    const auto r = m1.sigma_inverse(a1);
    for (int a2 = 0; a2 <= m2.nu(); ++a2) {
      const bool on_diagonal = r && m2.sigma(*r) == a2;
      if (!on_diagonal) rep.off_diagonal_mass += std::abs(rep.joint(a1, a2));
    }
  }
  for (int r = 0; r < n; ++r) rep.diagonal.push_back(rep.joint(m1.sigma(r), m2.sigma(r)));
  rep.first_stage_weights = pointer_weights(evolve(model, tau1), m1);
  return rep;
}

ReverseReport reverse_evolution(const SewellModel& model, int j) {
  if (j < 0 || j >= model.n()) throw ContractViolation("reverse_evolution: eigenindex out of range");
  const Index n = model.n();
  const Index N = model.apparatus_dim();
  const auto forward = evolve(model, model.tau());
  const Matrix pj = qalgebra::projector_onto(StateVector::basis(n, j)).matrix();
  const Matrix phi_j = kernels::kron(pj, forward.omega(j, j));
  const Matrix u_j = kernels::kron(pj, model.propagator(j, model.tau()));
  DensityMatrix reversed(Matrix(u_j * phi_j * u_j.adjoint()));

  const auto initial = evolve(model, 0.0);
  const auto app = qalgebra::partial_trace(reversed, n, N, qalgebra::Keep::apparatus);
  const auto obj = qalgebra::partial_trace(reversed, n, N, qalgebra::Keep::object);
  const auto obj0 = qalgebra::partial_trace(initial.phi, n, N, qalgebra::Keep::object);

  ReverseReport rep{j, reversed, 0, 0, 0, 0};
  rep.apparatus_distance = qalgebra::trace_distance(app, model.apparatus().omega());
  rep.object_distance_to_eigenstate = qalgebra::trace_distance(obj.matrix(), pj);
  rep.object_distance_to_initial = qalgebra::trace_distance(obj, obj0);
  rep.full_distance_to_initial = qalgebra::trace_distance(reversed, initial.phi);
  return rep;
}

}  // namespace collapse_lab::sewell

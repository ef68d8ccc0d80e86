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

#include "collapse_lab/insolubility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "collapse_lab/errors.hpp"

namespace collapse_lab::insolubility {

using qalgebra::max_norm;

namespace {

constexpr double kDistinctTol = 1e-10;
constexpr double kConservationTol = 1e-10;

Complex trace_product(const Matrix& a, const Matrix& b) {
  return (a.cwiseProduct(b.transpose())).sum();
}

Matrix lift_apparatus(Index n, const Matrix& m) {
  return kernels::kron(Matrix::Identity(n, n), m);
}

}  // namespace

// --------------------------------------------------------- ConservedQuantity

ConservedQuantity::ConservedQuantity(OperatorMatrix l_object, OperatorMatrix l_apparatus)
    : l_object_(std::move(l_object)), l_apparatus_(std::move(l_apparatus)) {
  if (!l_object_.is_hermitian() || !l_apparatus_.is_hermitian()) {
    throw ContractViolation("conserved quantity parts must be Hermitian");
  }
}

OperatorMatrix ConservedQuantity::total() const {
  return qalgebra::tensor(l_object_, OperatorMatrix::identity(l_apparatus_.dim())) +
         qalgebra::tensor(OperatorMatrix::identity(l_object_.dim()), l_apparatus_);
}

// --------------------------------------------------------- MeasurementScheme

MeasurementScheme::MeasurementScheme(OperatorMatrix object_obs, DensityMatrix initial_apparatus,
                                     OperatorMatrix unitary, MacroAlgebra pointer)
    : object_obs_(std::move(object_obs)), initial_apparatus_(std::move(initial_apparatus)),
      unitary_(std::move(unitary)), pointer_(std::move(pointer)) {
  if (!object_obs_.is_hermitian()) throw ContractViolation("object observable must be Hermitian");
  if (pointer_.dim() != initial_apparatus_.dim()) {
    throw ShapeError("pointer and apparatus state differ in dimension");
  }
  if (unitary_.dim() != object_dim() * apparatus_dim()) {
    throw ShapeError("scheme unitary must act on object (x) apparatus");
  }
  if (!unitary_.is_unitary()) {
    throw ContractViolation("scheme operator is not unitary (residual " +
                            std::to_string(unitary_.unitarity_residual()) + ")");
  }
  if (pointer_.object_dim() != object_dim()) {
    throw ShapeError("sigma must cover every eigenindex of the object observable");
  }
  const qalgebra::SpectralDecomposition sd(object_obs_);
  for (Index k = 0; k < sd.dim(); ++k) {
    eigenvalues_.push_back(sd.eigenvalues()(k));
    eigenstates_.push_back(StateVector::normalized(sd.eigenvectors().col(k)));
  }
}

Matrix MeasurementScheme::apply(const Matrix& w_object) const {
  const Matrix in = kernels::kron(w_object, initial_apparatus_.matrix());
  return unitary_.matrix() * in * unitary_.matrix().adjoint();
}

// ------------------------------------------------------------------- WAY

WayVerdict way_obstruction(const OperatorMatrix& a_obj, const ConservedQuantity& l) {
  if (!a_obj.is_hermitian()) throw ContractViolation("observable must be Hermitian");
  if (a_obj.dim() != l.l_object().dim()) throw ShapeError("observable and charge differ in dimension");
  WayVerdict v;
  v.residual = max_norm(qalgebra::commutator(a_obj.matrix(), l.l_object().matrix()));
  v.exact_possible = v.residual <= 1e-12;
  v.statement = v.exact_possible
                    ? "EXACT_POSSIBLE: observable commutes with the conserved charge"
                    : "EXACT_IMPOSSIBLE: U(phi_mu (x) xi) = phi_mu (x) xi_mu cannot hold; "
                      "the observable does not commute with the conserved charge";
  return v;
}

// ---------------------------------------------------------- malfunction

MalfunctionReport malfunction_epsilon(const MeasurementScheme& scheme) {
  MalfunctionReport rep;
  const Index n = scheme.object_dim();
  const auto& pointer = scheme.pointer();
  double total_fail = 0.0;
  for (int mu = 0; mu < n; ++mu) {
    const Matrix in = qalgebra::projector_onto(scheme.eigenstates()[static_cast<std::size_t>(mu)]).matrix();
    const Matrix out = scheme.apply(in);
    const Matrix hit = lift_apparatus(n, pointer.projector(pointer.sigma(mu)));
    const double success = std::clamp(trace_product(out, hit).real(), 0.0, 1.0);
    rep.per_eigenstate.emplace_back(mu, success);
    rep.epsilon = std::max(rep.epsilon, 1.0 - success);
    total_fail += 1.0 - success;
  }
  rep.mean_epsilon = total_fail / static_cast<double>(n);
  return rep;
}

std::string to_string(YanaseVerdict v) {
  switch (v) {
    case YanaseVerdict::satisfied: return "SATISFIED";
    case YanaseVerdict::violated: return "VIOLATED";
    case YanaseVerdict::degenerate: return "DEGENERATE";
    case YanaseVerdict::not_applicable: return "NOT_APPLICABLE";
  }
  return "UNKNOWN";
}

YanaseReport yanase_bound_check(const MeasurementScheme& scheme, const ConservedQuantity& l) {
  YanaseReport rep;
  if (scheme.object_dim() != 2 || l.l_object().dim() != 2 ||
      l.l_apparatus().dim() != scheme.apparatus_dim()) {
    rep.reason = "needs a qubit object and a charge on the scheme's spaces";
    return rep;
  }
  if (max_norm(l.l_object().matrix() - pauli_z().matrix()) > kTol.hermitian) {
    rep.reason = "object charge is not sigma_z";
    return rep;
  }
  const Matrix& a = scheme.object_obs().matrix();
  const double az = 0.5 * trace_product(a, pauli_z().matrix()).real();
  const double ax = 0.5 * trace_product(a, pauli_x().matrix()).real();
  const double ay = 0.5 * trace_product(a, pauli_y().matrix()).real();
  if (std::abs(az) > 1e-12 || std::hypot(ax, ay) <= 1e-12) {
    rep.reason = "observable is not an equatorial spin component (sigma_x, sigma_y)";
    return rep;
  }
  const auto& pointer = scheme.pointer();
  for (int al = 0; al <= pointer.nu(); ++al) {
    if (max_norm(qalgebra::commutator(pointer.projector(al), l.l_apparatus().matrix())) > 1e-10) {
      rep.reason = "pointer does not commute with the apparatus charge";
      return rep;
    }
  }

  const Matrix l_total = l.total().matrix();
  rep.conservation_residual = max_norm(qalgebra::commutator(scheme.unitary().matrix(), l_total));
  if (rep.conservation_residual > kConservationTol) {
    throw ContractViolation("scheme does not conserve the total charge (residual " +
                            std::to_string(rep.conservation_residual) + ")");
  }

  const Matrix& xi = scheme.initial_apparatus().matrix();
  const Matrix& la = l.l_apparatus().matrix();
  rep.m_squared = trace_product(xi, la * la).real();
  const double mean = trace_product(xi, la).real();
  rep.variance = std::max(0.0, rep.m_squared - mean * mean);
  rep.exact_bound = 1.0 / (8.0 * (1.0 + rep.variance));

  rep.malfunction = malfunction_epsilon(scheme);
  rep.malfunction.m_squared = rep.m_squared;
  const double eps = rep.malfunction.epsilon;
  rep.exact_bound_holds = eps >= rep.exact_bound - 1e-10;

  if (rep.m_squared <= 1e-14) {
    rep.bound = std::numeric_limits<double>::infinity();
    rep.malfunction.bound = rep.bound;
    rep.verdict = YanaseVerdict::degenerate;
    rep.reason = "M^2 = 0: bound is infinite, no scheme can measure with this apparatus state";
    return rep;
  }
  rep.bound = 1.0 / (8.0 * rep.m_squared);
  rep.malfunction.bound = rep.bound;
  rep.verdict = eps >= rep.bound - 1e-10 ? YanaseVerdict::satisfied : YanaseVerdict::violated;
  return rep;
}

// ----------------------------------------------------- commutant

CommutantParametrization::CommutantParametrization(const OperatorMatrix& l_total, double tol) {
  const qalgebra::SpectralDecomposition sd(l_total);
  basis_ = sd.eigenvectors();
  const auto& vals = sd.eigenvalues();
  for (Index k = 0; k < vals.size(); ++k) {
    if (blocks_.empty() || vals(k) - vals(blocks_.back().front()) > tol) blocks_.emplace_back();
    blocks_.back().push_back(k);
  }
  for (const auto& b : blocks_) num_params_ += static_cast<Index>(b.size() * b.size());
}

Matrix CommutantParametrization::generator(std::span<const double> params) const {
  if (static_cast<Index>(params.size()) != num_params_) {
    throw ShapeError("wrong number of commutant parameters");
  }
  Matrix h = Matrix::Zero(dim(), dim());
  std::size_t p = 0;
  for (const auto& b : blocks_) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      h(b[i], b[i]) = params[p++];
      for (std::size_t j = i + 1; j < b.size(); ++j) {
        const Complex z(params[p], params[p + 1]);
        p += 2;
        h(b[i], b[j]) = z;
        h(b[j], b[i]) = std::conj(z);
      }
    }
  }
  return basis_ * h * basis_.adjoint();
}

Matrix CommutantParametrization::unitary(std::span<const double> params) const {
  const Matrix g = generator(params);
  return qalgebra::SpectralDecomposition(OperatorMatrix(Matrix(0.5 * (g + g.adjoint())))).exp_i(1.0);
}

Matrix CommutantParametrization::project(const Matrix& h) const {
  const Matrix in_basis = basis_.adjoint() * h * basis_;
  Matrix out = Matrix::Zero(dim(), dim());
  for (const auto& b : blocks_) {
    for (Index i : b)
      for (Index j : b) out(i, j) = in_basis(i, j);
  }
  return basis_ * out * basis_.adjoint();
}

Matrix CommutantParametrization::random_unitary(Rng& rng) const {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix h(dim(), dim());
  for (Index i = 0; i < dim(); ++i)
    for (Index j = 0; j < dim(); ++j) h(i, j) = Complex(gauss(rng), gauss(rng));
  h = 0.5 * (h + h.adjoint()).eval();
  const Matrix g = project(h);
  return qalgebra::SpectralDecomposition(OperatorMatrix(Matrix(0.5 * (g + g.adjoint())))).exp_i(1.0);
}

// ---------------------------------------------------- ladder constructions

OperatorMatrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return OperatorMatrix(std::move(m));
}

OperatorMatrix pauli_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return OperatorMatrix(std::move(m));
}

OperatorMatrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return OperatorMatrix(std::move(m));
}

OperatorMatrix ladder_charge(Index d) {
  if (d < 1) throw ContractViolation("ladder dimension must be positive");
  std::vector<double> values;
  for (Index k = 0; k < d; ++k) values.push_back(static_cast<double>(2 * k - (d - 1)));
  return OperatorMatrix::diagonal(values);
}

ConservedQuantity ladder_conserved_quantity(Index d) {
  return ConservedQuantity(pauli_z(), ladder_charge(d));
}

MacroAlgebra parity_pointer(Index d) {
  if (d < 2) throw ContractViolation("parity pointer needs d >= 2");
  Matrix rest = Matrix::Zero(d, d);
  Matrix even = Matrix::Zero(d, d);
  Matrix odd = Matrix::Zero(d, d);
  for (Index k = 0; k < d; ++k) (k % 2 == 0 ? even : odd)(k, k) = 1.0;
  // Eigenindex 0 is the -1 eigenstate of sigma_x, eigenindex 1 the +1 one.
  return MacroAlgebra({rest, even, odd}, {1.0, -1.0}, {2, 1});
}

MeasurementScheme araki_yanase_scheme_dim(Index d) {
  if (d < 2) throw ContractViolation("ladder dimension must be >= 2");
  // Object basis |up>=0, |down>=1; composite index o*d + k. Sector pairs
  // (up, k) with (down, k+1); edge states (down, 0) and (up, d-1) are alone.
  const Index dim = 2 * d;
  Matrix u = Matrix::Identity(dim, dim);
  const double h = 1.0 / std::numbers::sqrt2;
  for (Index k = 0; k + 1 < d; ++k) {
    const Index a = k;            // |up, k>
    const Index b = d + k + 1;    // |down, k+1>
    // Hadamard sends (1,1)/sqrt2 -> |up,k> and (1,-1)/sqrt2 -> |down,k+1>;
    // for odd k the outputs are swapped so + always lands on an even level.
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    u(a, a) = h;
    u(a, b) = h;
    u(b, a) = h;
    u(b, b) = -h;
    if (sign < 0) u.row(a).swap(u.row(b));
  }
  qalgebra::Vector xi = qalgebra::Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  return MeasurementScheme(pauli_x(), DensityMatrix::pure(StateVector::normalized(xi)),
                           OperatorMatrix(std::move(u)), parity_pointer(d));
}

MeasurementScheme araki_yanase_scheme(int ell) {
  if (ell < 1) throw ContractViolation("spin cutoff ell must be >= 1");
  return araki_yanase_scheme_dim(2 * ell + 1);
}

ConservingFamily sigma_x_ladder_family(Index d) {
  qalgebra::Vector xi = qalgebra::Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  return ConservingFamily{pauli_x(), ladder_conserved_quantity(d),
                          DensityMatrix::pure(StateVector::normalized(xi)), parity_pointer(d)};
}

ConservingFamily sigma_z_ladder_family(Index d) {
  if (d < 3) throw ContractViolation("sigma_z ladder family needs d >= 3");
  // Middle level in the rest cell; one sector step up or down reads the spin.
  const Index mid = (d - 1) / 2;
  Matrix rest = Matrix::Zero(d, d), up = Matrix::Zero(d, d), down = Matrix::Zero(d, d);
  for (Index k = 0; k < d; ++k) {
    if (k == mid) rest(k, k) = 1.0;
    else if (k > mid) up(k, k) = 1.0;
    else down(k, k) = 1.0;
  }
  // sigma_z eigenindex 0 is -1 (down), 1 is +1 (up). The sector partner of
  // (up, k) is (down, k+1), so an up input is read in the upper cell.
  MacroAlgebra pointer({rest, up, down}, {1.0, -1.0}, {2, 1});
  return ConservingFamily{pauli_z(), ladder_conserved_quantity(d),
                          DensityMatrix::pure(StateVector::basis(d, mid)), std::move(pointer)};
}

// ------------------------------------------------------------- search

SearchResult minimize_epsilon(const ConservingFamily& family, const SearchBudget& budget) {
  if (budget.restarts <= 0 || budget.evaluations <= 0) {
    throw ContractViolation("minimize_epsilon: empty search budget");
  }
  const CommutantParametrization param(family.charge.total());
  if (param.num_params() == 0) throw ContractViolation("minimize_epsilon: empty family");
  if (param.dim() != family.object_obs.dim() * family.initial_apparatus.dim()) {
    throw ShapeError("family charge does not match the object and apparatus spaces");
  }

  // Worst-case epsilon is flat under single-coordinate moves until every
  // input improves, so ties are broken by the input-averaged value.
  using Score = std::pair<double, double>;
  int used = 0;
  auto evaluate = [&](const std::vector<double>& p) {
    ++used;
    MeasurementScheme s(family.object_obs, family.initial_apparatus,
                        OperatorMatrix(param.unitary(p)), family.pointer);
    const auto rep = malfunction_epsilon(s);
    return Score{rep.epsilon, rep.mean_epsilon};
  };

  const auto np = static_cast<std::size_t>(param.num_params());
  std::vector<double> best_p(np, 0.0);
  Score best{std::numeric_limits<double>::infinity(), 0.0};
  const int per_restart = std::max(1, budget.evaluations / budget.restarts);

  for (int restart = 0; restart < budget.restarts && used < budget.evaluations; ++restart) {
    auto rng = make_rng(budget.seed, "minimize_epsilon.restart", static_cast<std::uint64_t>(restart));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> p(np, 0.0);
    if (restart > 0) {
      for (auto& x : p) x = gauss(rng);
    }
    Score value = evaluate(p);
    double step = 0.5;
    const int stop = std::min(budget.evaluations, used + per_restart);
    while (used + 2 <= stop && step > 1e-10 && value.first > 0.0) {
      bool improved = false;
      for (std::size_t i = 0; i < np && used + 2 <= stop; ++i) {
        const double x0 = p[i];
        p[i] = x0 + step;
        const Score up = evaluate(p);
        p[i] = x0 - step;
        const Score dn = evaluate(p);
        if (up < value && up <= dn) {
          p[i] = x0 + step;
          value = up;
          improved = true;
        } else if (dn < value) {
          value = dn;
          improved = true;
        } else {
          p[i] = x0;
        }
      }
      if (!improved) step *= 0.5;
    }
    if (value < best) {
      best = value;
      best_p = p;
    }
  }

  MeasurementScheme scheme(family.object_obs, family.initial_apparatus,
                           OperatorMatrix(param.unitary(best_p)), family.pointer);
  return SearchResult{std::move(scheme), best.first, used, std::move(best_p)};
}

// ------------------------------------------------------------- sweep

MeasurementScheme sample_conserving_scheme(Index d, Rng& rng, double min_m_squared) {
  const ConservedQuantity charge = ladder_conserved_quantity(d);
  const CommutantParametrization param(charge.total());
  const Matrix u = param.random_unitary(rng);

  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto& la = charge.l_apparatus().matrix();
  qalgebra::Vector xi(d);
  for (;;) {
    for (Index k = 0; k < d; ++k) xi(k) = Complex(gauss(rng), gauss(rng));
    xi.normalize();
    double m2 = 0.0;
    for (Index k = 0; k < d; ++k) m2 += std::norm(xi(k)) * std::norm(la(k, k));
    if (m2 >= min_m_squared - 1e-12) break;
  }

  std::uniform_int_distribution<int> pick(0, 2);
  std::vector<Matrix> cells(3, Matrix::Zero(d, d));
  for (Index k = 0; k < d; ++k) cells[static_cast<std::size_t>(pick(rng))](k, k) = 1.0;
  MacroAlgebra pointer(std::move(cells), {1.0, -1.0}, {2, 1});
  return MeasurementScheme(pauli_x(), DensityMatrix::pure(StateVector::normalized(xi)),
                           OperatorMatrix(u), std::move(pointer));
}

std::vector<YanaseSample> yanase_sweep(const YanaseSweepConfig& config, kernels::Execution ex) {
  if (config.samples < 0 || config.min_dim < 2 || config.max_dim < config.min_dim) {
    throw ContractViolation("yanase_sweep: bad configuration");
  }
  const Index span = config.max_dim - config.min_dim + 1;
  std::vector<YanaseSample> out(static_cast<std::size_t>(config.samples));

  auto run_one = [&](int i) {
    const Index d = config.min_dim + i % span;
    auto rng = make_rng(config.seed, "yanase.sample", static_cast<std::uint64_t>(i));
    const auto scheme = sample_conserving_scheme(d, rng, config.min_m_squared);
    const auto rep = yanase_bound_check(scheme, ladder_conserved_quantity(d));
    out[static_cast<std::size_t>(i)] =
        YanaseSample{d, rep.malfunction.epsilon, rep.m_squared, rep.bound, rep.exact_bound,
                     rep.verdict, rep.exact_bound_holds, rep.conservation_residual};
  };

  if (ex == kernels::Execution::serial) {
    for (int i = 0; i < config.samples; ++i) run_one(i);
  } else {
#pragma omp parallel for schedule(dynamic, 16)
    for (int i = 0; i < config.samples; ++i) run_one(i);
  }
  return out;
}

// ---------------------------------------------------- Shimony and Brown

MixtureCheck is_pointer_mixture(const Matrix& w, const MacroAlgebra& pointer, double tol) {
  const Index N = pointer.dim();
  if (w.rows() != w.cols() || N == 0 || w.rows() % N != 0) {
    throw ShapeError("state dimension is not a multiple of the pointer dimension");
  }
  const Index n = w.rows() / N;
  Matrix diag_part = Matrix::Zero(w.rows(), w.cols());
  for (int al = 0; al <= pointer.nu(); ++al) {
    const Matrix p = lift_apparatus(n, pointer.projector(al));
    diag_part += p * w * p;
  }
  MixtureCheck out;
  out.off_block_norm = (w - diag_part).norm();
  out.is_mixture = out.off_block_norm <= tol;
  return out;
}

std::string to_string(ShimonyStatus s) {
  switch (s) {
    case ShimonyStatus::pass: return "PASS";
    case ShimonyStatus::fail: return "FAIL";
    case ShimonyStatus::not_a_mixture: return "NOT_A_MIXTURE";
  }
  return "UNKNOWN";
}

ShimonyReport shimony_approx_check(const MeasurementScheme& scheme, const DensityMatrix& t_init,
                                   const StateVector& phi, int m, double delta) {
  if (phi.dim() != scheme.object_dim() || t_init.dim() != scheme.apparatus_dim()) {
    throw ShapeError("shimony_approx_check: dimension mismatch");
  }
  if (m < 0 || m >= scheme.object_dim()) throw ContractViolation("eigenindex out of range");
  const Index n = scheme.object_dim();
  const Matrix in = kernels::kron(qalgebra::projector_onto(phi).matrix(), t_init.matrix());
  const Matrix& u = scheme.unitary().matrix();
  const Matrix w = u * in * u.adjoint();
  const auto& pointer = scheme.pointer();

  ShimonyReport rep;
  rep.delta = delta;
  rep.target_cell = pointer.sigma(m);
  const auto mix = is_pointer_mixture(w, pointer);
  rep.off_block_norm = mix.off_block_norm;
  if (!mix.is_mixture) {
    rep.status = ShimonyStatus::not_a_mixture;
    return rep;
  }
  for (int al = 0; al <= pointer.nu(); ++al) {
    const Matrix p = lift_apparatus(n, pointer.projector(al));
    const Matrix blk = p * w * p;
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(0.5 * (blk + blk.adjoint())), Eigen::EigenvaluesOnly);
    double mass = 0.0;
    for (Index k = 0; k < es.eigenvalues().size(); ++k) {
      const double a = std::max(0.0, es.eigenvalues()(k));
      if (a > 1e-14) rep.weights.emplace_back(al, a);
      mass += a;
    }
    if (al != rep.target_cell) rep.off_target_mass += mass;
  }
  rep.status = rep.off_target_mass <= delta ? ShimonyStatus::pass : ShimonyStatus::fail;
  return rep;
}

bool a_distinct(const Matrix& w1, const Matrix& w2, const OperatorMatrix& a) {
  if (w1.rows() != a.dim() || w2.rows() != a.dim()) throw ShapeError("a_distinct: dimension mismatch");
  for (const auto& sp : qalgebra::spectral_projectors(a)) {
    const double d = std::abs(trace_product(w1, sp.projector).real() -
                              trace_product(w2, sp.projector).real());
    if (d > kDistinctTol) return true;
  }
  return false;
}

Matrix Ensemble::density() const {
  if (components.empty()) throw ContractViolation("empty ensemble");
  const Index n = components.front().second.dim();
  Matrix w = Matrix::Zero(n, n);
  double total = 0.0;
  for (const auto& [c, phi] : components) {
    if (!(c > 0.0)) throw ContractViolation("ensemble weights must be positive");
    if (phi.dim() != n) throw ShapeError("ensemble components differ in dimension");
    w += c * qalgebra::projector_onto(phi).matrix();
    total += c;
  }
  if (std::abs(total - 1.0) > kTol.norm) throw ContractViolation("ensemble weights must sum to 1");
  return w;
}

Matrix rue_evolve(const OperatorMatrix& u, const Ensemble& object, const DensityMatrix& w_app) {
  (void)object.density();  // validates the declared decomposition
  const Index dim = object.components.front().second.dim() * w_app.dim();
  if (u.dim() != dim) throw ShapeError("rue_evolve: unitary does not match object (x) apparatus");
  Matrix out = Matrix::Zero(dim, dim);
  for (const auto& [c, phi] : object.components) {
    const Matrix in = kernels::kron(qalgebra::projector_onto(phi).matrix(), w_app.matrix());
    out += c * (u.matrix() * in * u.matrix().adjoint());
  }
  return out;
}

FineBrownVerdict fine_brown_is_measurement(const OperatorMatrix& u, const OperatorMatrix& a_obj,
                                           const OperatorMatrix& a_app,
                                           const DensityMatrix& w_app,
                                           const std::vector<Ensemble>& probes) {
  if (!u.is_unitary()) throw ContractViolation("fine_brown: U is not unitary");
  if (u.dim() != a_obj.dim() * a_app.dim() || w_app.dim() != a_app.dim()) {
    throw ShapeError("fine_brown: dimension mismatch");
  }
  FineBrownVerdict v;
  std::vector<Matrix> initial;
  for (const auto& probe : probes) {
    initial.push_back(probe.density());
    v.finals.push_back(rue_evolve(u, probe, w_app));
  }
  const OperatorMatrix pointer_obs = qalgebra::tensor(OperatorMatrix::identity(a_obj.dim()), a_app);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    for (std::size_t j = i + 1; j < probes.size(); ++j) {
      if (!a_distinct(initial[i], initial[j], a_obj)) continue;
      ++v.distinct_pairs;
      if (a_distinct(v.finals[i], v.finals[j], pointer_obs)) ++v.pairs_passed;
    }
  }
  if (v.distinct_pairs == 0) {
    throw ContractViolation("fine_brown: probes contain no A-distinct pair (vacuous test)");
  }
  v.is_measurement = v.pairs_passed == v.distinct_pairs;
  return v;
}

OperatorMatrix controlled_shift() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = 1.0;  // |0,0> -> |0,0>
  m(1, 1) = 1.0;  // |0,1> -> |0,1>
  m(3, 2) = 1.0;  // |1,0> -> |1,1>
  m(2, 3) = 1.0;  // |1,1> -> |1,0>
  return OperatorMatrix(std::move(m));
}

MacroAlgebra qubit_pointer() {
  Matrix rest = Matrix::Zero(2, 2), zero = Matrix::Zero(2, 2), one = Matrix::Zero(2, 2);
  zero(0, 0) = 1.0;
  one(1, 1) = 1.0;
  return MacroAlgebra({rest, zero, one}, {1.0, -1.0}, {2, 1});
}

LeakyScheme leaky_pointer_scheme(double leak) {
  if (!(leak >= 0.0 && leak <= 1.0)) throw ContractViolation("leak must lie in [0, 1]");
  // Composite index o*4 + k; object |0> is sigma_z = +1 (eigenindex 1).
  Matrix u = Matrix::Zero(8, 8);
  auto swap = [&u](Index x, Index y) {
    u(x, y) = 1.0;
    u(y, x) = 1.0;
  };
  swap(0, 2);  // |0,a> <-> |0,2>
  swap(1, 3);  // |0,b> <-> |0,3>
  swap(4, 7);  // |1,a> <-> |1,3>
  swap(5, 6);  // |1,b> <-> |1,2>
  Matrix rest = Matrix::Zero(4, 4), one = Matrix::Zero(4, 4), two = Matrix::Zero(4, 4);
  rest(0, 0) = rest(1, 1) = 1.0;
  one(2, 2) = 1.0;
  two(3, 3) = 1.0;
  MacroAlgebra pointer({rest, one, two}, {1.0, -1.0}, {2, 1});
  Matrix t = Matrix::Zero(4, 4);
  t(0, 0) = 1.0 - leak;
  t(1, 1) = leak;
  DensityMatrix t_init(t);
  return LeakyScheme{MeasurementScheme(pauli_z(), t_init, OperatorMatrix(std::move(u)),
                                       std::move(pointer)),
                     t_init};
}

}  // namespace collapse_lab::insolubility

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

#include "collapse_lab/cli/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "collapse_lab/compton.hpp"
#include "collapse_lab/errors.hpp"
#include "collapse_lab/insolubility.hpp"
#include "collapse_lab/rng.hpp"
#include "collapse_lab/sewell.hpp"

namespace collapse_lab::cli {

namespace {

using qalgebra::Index;
using qalgebra::Matrix;
using qalgebra::OperatorMatrix;
using qalgebra::StateVector;

std::string num(double v) {
  // Index labels only; values go through the emitter's formatter.
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

constexpr double kCollapseTol = 1e-10;
constexpr double kStructuralTol = 1e-12;

// ----------------------------------------------------------- Sewell family

sewell::SewellModel build_model(const SewellParams& p, std::uint64_t seed, std::string_view label) {
  sewell::ObjectSpec object(p.lambdas, p.energies, p.amplitudes);
  sewell::PointerOptions opt;
  opt.h_a_mode = p.h_a_mode;
  opt.seed = derive_seed(seed, label);
  opt.rest_spectrum = p.rest_spectrum;
  auto app = sewell::build_pointer_apparatus(static_cast<int>(p.lambdas.size()), p.cell_dim, p.tau, opt);
  return sewell::SewellModel(std::move(object), std::move(app), p.tau);
}

void structural_checks(RunReport& rep, const sewell::SewellModel& model) {
  rep.check("conservation", model.conservation_residual(), kStructuralTol);
  rep.check("coupled_form", model.coupled_form_residual(), kStructuralTol);
}

void note_renormalization(RunReport& rep, const SewellParams& p) {
  if (p.renormalized_by > 0.0) {
    rep.notes.push_back("amplitudes rescaled to unit norm; input deviation " + num(p.renormalized_by));
  }
}

void run_sewell(RunReport& rep, const SewellParams& p, std::uint64_t seed) {
  note_renormalization(rep, p);
  const auto model = build_model(p, seed, "pointer");
  structural_checks(rep, model);
  const auto& macro = model.macro();
  const auto o = model.object().observable();

  const auto cond = sewell::verify_measurement_conditions(model);
  rep.check("measurement_conditions", cond.max_residual, cond.cond_tol);
  rep.check("cross_terms", cond.max_cross, kCollapseTol);
  if (!cond.pass) return;

  const auto cr = sewell::collapse_report(model);
  rep.add("expectation", "t=tau", cr.expectation, std::abs(cr.expectation - cr.predicted_expectation));
  rep.add("predicted_expectation", "", cr.predicted_expectation);
  for (const auto& ce : cr.conditional) {
    if (!ce.value) continue;
    const auto r = macro.sigma_inverse(ce.alpha);
    const double target = r ? p.lambdas[static_cast<std::size_t>(*r)] : std::nan("");
    rep.add("conditional_expectation", std::to_string(ce.alpha), *ce.value,
            r ? std::optional<double>(std::abs(*ce.value - target)) : std::nullopt);
  }
  for (std::size_t a = 0; a < cr.weights.size(); ++a) {
    rep.add("pointer_weight", std::to_string(a), cr.weights[a],
            std::abs(cr.weights[a] - cr.predicted_weights[a]));
  }
  rep.check("collapse", cr.max_conditional_residual, kCollapseTol);
  rep.check("pointer_statistics", cr.max_weight_residual, kCollapseTol);
  if (cr.eigen_input) {
    rep.add("eigen_input", "", *cr.eigen_input);
    rep.check("eigenstate_input", cr.eigen_object_residual, kStructuralTol);
  }

  // Second route to the conditional expectation, through its defining identity.
  const auto at_tau = sewell::evolve(model, model.tau());
  const auto via = sewell::conditional_expectation_via_identity(at_tau, o, macro);
  double route_gap = 0.0;
  for (std::size_t a = 0; a < via.size(); ++a) {
    if (via[a].value && cr.conditional[a].value) {
      route_gap = std::max(route_gap, std::abs(*via[a].value - *cr.conditional[a].value));
    }
  }
  rep.check("conditional_identity", route_gap, 1e-8);

  double drift = 0.0;
  for (double t : {0.0, 0.5 * p.tau, p.tau, 2.0 * p.tau}) {
    const double e = sewell::object_expectation(sewell::evolve(model, t), o);
    drift = std::max(drift, std::abs(e - cr.predicted_expectation));
    rep.add("expectation_t", "t=" + num(t), e, std::abs(e - cr.predicted_expectation));
  }
  rep.check("expectation_conservation", drift, kCollapseTol);

  std::vector<double> times = p.times;
  if (times.empty()) {
    for (int k = 0; k <= 40; ++k) times.push_back(2.0 * p.tau * k / 40.0);
  }
  Plot plot{"pointer_weights", "Pointer weights w_alpha(t)", "t", "w_alpha", {}};
  for (int a = 0; a <= macro.nu(); ++a) plot.series.push_back({"alpha=" + std::to_string(a), {}, {}, false});
  for (double t : times) {
    const auto w = sewell::pointer_weights(sewell::evolve(model, t), macro);
    for (int a = 0; a <= macro.nu(); ++a) {
      const double v = w[static_cast<std::size_t>(a)];
      rep.add("pointer_weight_t", "alpha=" + std::to_string(a) + ";t=" + num(t), v);
      plot.series[static_cast<std::size_t>(a)].x.push_back(t);
      plot.series[static_cast<std::size_t>(a)].y.push_back(v);
    }
  }
  rep.plots.push_back(std::move(plot));
}

void run_two_stage(RunReport& rep, const TwoStageParams& p, std::uint64_t seed) {
  note_renormalization(rep, p.first);
  const auto model = build_model(p.first, seed, "pointer");
  structural_checks(rep, model);
  sewell::PointerOptions opt2;
  opt2.h_a_mode = p.h_a_mode2;
  opt2.seed = derive_seed(seed, "pointer.second");
  const auto second = sewell::build_pointer_apparatus(static_cast<int>(p.first.lambdas.size()),
                                                      p.cell_dim2, p.tau2, opt2);
  const auto ts = sewell::two_stage_measurement(model, second);
  rep.add("triple_dim", "", static_cast<double>(ts.triple_dim));
  for (Index a1 = 0; a1 < ts.joint.rows(); ++a1) {
    for (Index a2 = 0; a2 < ts.joint.cols(); ++a2) {
      rep.add("joint", std::to_string(a1) + ";" + std::to_string(a2), ts.joint(a1, a2));
    }
  }
  double diag_gap = 0.0;
  for (std::size_t r = 0; r < ts.diagonal.size(); ++r) {
    const double target = std::norm(p.first.amplitudes[r]);
    const double gap = std::abs(ts.diagonal[r] - target);
    diag_gap = std::max(diag_gap, gap);
    rep.add("joint_diagonal", std::to_string(r), ts.diagonal[r], gap);
  }
  rep.add("off_diagonal_mass", "", ts.off_diagonal_mass);
  for (std::size_t a = 0; a < ts.first_stage_weights.size(); ++a) {
    rep.add("first_stage_weight", std::to_string(a), ts.first_stage_weights[a]);
  }
  rep.check("repeatability_off_diagonal", ts.off_diagonal_mass, kCollapseTol);
  rep.check("repeatability_diagonal", diag_gap, kCollapseTol);
}

void run_reverse(RunReport& rep, const ReverseParams& p, std::uint64_t seed) {
  note_renormalization(rep, p.base);
  const auto model = build_model(p.base, seed, "pointer");
  structural_checks(rep, model);
  const auto rr = sewell::reverse_evolution(model, p.j);
  rep.add("apparatus_distance", std::to_string(p.j), rr.apparatus_distance);
  rep.add("object_distance_to_eigenstate", std::to_string(p.j), rr.object_distance_to_eigenstate);
  rep.add("object_distance_to_initial", std::to_string(p.j), rr.object_distance_to_initial);
  rep.add("full_distance_to_initial", std::to_string(p.j), rr.full_distance_to_initial);
  rep.check("reversal_apparatus", rr.apparatus_distance, kCollapseTol);
  rep.check("reversal_object_eigenstate", rr.object_distance_to_eigenstate, kCollapseTol);
}

// ----------------------------------------------------------- no-go checks

void run_way(RunReport& rep, const WayParams& p, std::uint64_t seed) {
  using namespace insolubility;
  const ConservedQuantity qubit_charge(pauli_z(), ladder_charge(1));
  const auto wx = way_obstruction(pauli_x(), qubit_charge);
  const auto wz = way_obstruction(pauli_z(), qubit_charge);
  rep.add("way_residual", "sigma_x", wx.residual);
  rep.add("way_residual", "sigma_z", wz.residual);
  rep.notes.push_back("sigma_x: " + wx.statement);
  rep.notes.push_back("sigma_z: " + wz.statement);

  const int dims = p.max_dim - p.min_dim + 1;
  std::vector<SearchResult> found;
  found.reserve(static_cast<std::size_t>(dims));
  for (int d = p.min_dim; d <= p.max_dim; ++d) {
    const SearchBudget budget{p.restarts, p.evaluations,
                              derive_seed(seed, "way.search", static_cast<std::uint64_t>(d))};
    found.push_back(minimize_epsilon(sigma_x_ladder_family(d), budget));
  }

  Plot plot{"epsilon_vs_ell", "Malfunction probability vs apparatus spin", "ell", "epsilon", {}};
  Series s_star{"searched epsilon*", {}, {}, false};
  Series s_ay{"Araki-Yanase scheme", {}, {}, false};
  Series s_bound{"1/(8 M^2) of the AY scheme", {}, {}, false};
  double worst_gap = 0.0;
  double min_star = std::numeric_limits<double>::infinity();
  for (int d = p.min_dim; d <= p.max_dim; ++d) {
    const auto& res = found[static_cast<std::size_t>(d - p.min_dim)];
    const auto yb = yanase_bound_check(res.scheme, ladder_conserved_quantity(d));
    const auto ay = yanase_bound_check(araki_yanase_scheme_dim(d), ladder_conserved_quantity(d));
    const std::string idx = std::to_string(d);
    const double ell = 0.5 * (d - 1);
    rep.add("epsilon_star", idx, res.epsilon);
    rep.add("epsilon_star_bound", idx, yb.bound, std::max(0.0, yb.bound - res.epsilon));
    rep.add("epsilon_star_m_squared", idx, yb.m_squared);
    rep.add("search_evaluations", idx, res.evaluations_used);
    rep.add("epsilon_araki_yanase", idx, ay.malfunction.epsilon);
    rep.add("araki_yanase_bound", idx, ay.bound, std::max(0.0, ay.bound - ay.malfunction.epsilon));
    worst_gap = std::max({worst_gap, yb.bound - res.epsilon, ay.bound - ay.malfunction.epsilon});
    min_star = std::min(min_star, res.epsilon);
    s_star.x.push_back(ell);
    s_star.y.push_back(res.epsilon);
    s_ay.x.push_back(ell);
    s_ay.y.push_back(ay.malfunction.epsilon);
    s_bound.x.push_back(ell);
    s_bound.y.push_back(ay.bound);
  }
  rep.require("search_epsilon_positive", min_star > 0.0, min_star, 0.0);
  rep.check("search_yanase_bound", std::max(0.0, worst_gap), 1e-10);
  plot.series = {s_star, s_ay, s_bound};
  rep.plots.push_back(std::move(plot));
  rep.notes.push_back("epsilon* is the best value found by a seeded local search; it is not a "
                      "certified global minimum");

  if (p.samples > 0) {
    const YanaseSweepConfig sc{p.samples, p.sweep_min_dim, p.sweep_max_dim,
                               derive_seed(seed, "way.sweep"), p.min_m_squared};
    const auto samples = yanase_sweep(sc);
    int satisfied = 0, violated = 0, degenerate = 0, exact_fail = 0;
    double gap = 0.0, conservation = 0.0;
    double min_slack = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
      switch (s.verdict) {
        case YanaseVerdict::satisfied: ++satisfied; break;
        case YanaseVerdict::violated: ++violated; break;
        case YanaseVerdict::degenerate: ++degenerate; break;
        case YanaseVerdict::not_applicable: break;
      }
      if (!s.exact_bound_holds) ++exact_fail;
      if (s.verdict != YanaseVerdict::degenerate) {
        gap = std::max(gap, s.bound - s.epsilon);
        min_slack = std::min(min_slack, s.epsilon - s.bound);
      }
      conservation = std::max(conservation, s.conservation_residual);
    }
    rep.add("sweep_samples", "", samples.size());
    rep.add("sweep_satisfied", "", satisfied);
    rep.add("sweep_violated", "", violated);
    rep.add("sweep_degenerate", "", degenerate);
    rep.add("sweep_exact_bound_failures", "", exact_fail);
    if (std::isfinite(min_slack)) rep.add("sweep_min_slack", "", min_slack);
    rep.add("sweep_max_conservation_residual", "", conservation);
    rep.check("yanase_bound", std::max(0.0, gap), 1e-10);
    rep.check("sweep_conservation", conservation, 1e-10);
  }
}

void run_shimony(RunReport& rep, const ShimonyParams& p) {
  using namespace insolubility;
  const auto leaky = leaky_pointer_scheme(p.leak);
  const auto up = StateVector::basis(2, 0);  // sigma_z = +1, eigenindex 1
  for (double delta : p.deltas) {
    const auto r = shimony_approx_check(leaky.scheme, leaky.t_init, up, 1, delta);
    double total = 0.0;
    for (const auto& [cell, a] : r.weights) total += a;
    rep.add("leak_off_target_mass", "delta=" + num(delta), r.off_target_mass);
    rep.add("leak_pass", "delta=" + num(delta), r.status == ShimonyStatus::pass ? 1.0 : 0.0);
    rep.notes.push_back("leak " + num(p.leak) + ", delta " + num(delta) + ": " + to_string(r.status));
    rep.check("shimony_weights_normalized", std::abs(total - 1.0), kStructuralTol);
  }

  StateVector input = p.input.empty()
                          ? StateVector::normalized(qalgebra::Vector::Constant(2, 1.0))
                          : StateVector::normalized(Eigen::Map<const qalgebra::Vector>(p.input.data(), 2));
  const DensityMatrix ready = DensityMatrix::pure(StateVector::basis(2, 0));
  const MeasurementScheme cnot(pauli_z(), ready, controlled_shift(), qubit_pointer());
  const auto r = shimony_approx_check(cnot, ready, input, 1, p.deltas.empty() ? 0.1 : p.deltas.front());
  rep.add("witness_off_block_norm", "", r.off_block_norm);
  rep.add("witness_is_mixture", "", r.status == ShimonyStatus::not_a_mixture ? 0.0 : 1.0);
  rep.notes.push_back("controlled-shift witness: " + to_string(r.status));
}

void run_fine_brown(RunReport& rep, const FineBrownParams& p) {
  using namespace insolubility;
  std::vector<Ensemble> probes;
  if (p.probes.empty()) {
    probes.push_back({{{1.0, StateVector::basis(2, 0)}}});
    probes.push_back({{{1.0, StateVector::basis(2, 1)}}});
    probes.push_back({{{1.0, StateVector::normalized(qalgebra::Vector::Constant(2, 1.0))}}});
  } else {
    for (const auto& e : p.probes) {
      Ensemble ens;
      for (std::size_t k = 0; k < e.states.size(); ++k) {
        ens.components.emplace_back(
            e.weights[k], StateVector::normalized(Eigen::Map<const qalgebra::Vector>(e.states[k].data(), 2)));
      }
      probes.push_back(std::move(ens));
    }
  }
  const OperatorMatrix u = p.unitary == "identity" ? OperatorMatrix::identity(4) : controlled_shift();
  const DensityMatrix ready = DensityMatrix::pure(StateVector::basis(2, 0));
  const auto v = fine_brown_is_measurement(u, pauli_z(), pauli_z(), ready, probes);
  rep.add("is_measurement", p.unitary, v.is_measurement ? 1.0 : 0.0);
  rep.add("distinct_pairs", "", v.distinct_pairs);
  rep.add("pairs_passed", "", v.pairs_passed);
  const auto pointer = qubit_pointer();
  for (std::size_t k = 0; k < v.finals.size(); ++k) {
    const auto mix = is_pointer_mixture(v.finals[k], pointer);
    rep.add("final_off_block_norm", std::to_string(k), mix.off_block_norm);
    rep.add("final_is_mixture", std::to_string(k), mix.is_mixture ? 1.0 : 0.0);
    const double tr = v.finals[k].trace().real();
    rep.check("final_trace", std::abs(tr - 1.0), kStructuralTol);
  }
}

// ----------------------------------------------------------------- Compton

void add_coincidence(RunReport& rep, const std::string& prefix, const compton::CoincidenceReport& c) {
  rep.add(prefix + "n_events", "", static_cast<double>(c.n_events));
  rep.add(prefix + "hits", "", static_cast<double>(c.hits));
  rep.add(prefix + "hit_fraction", "", c.hit_fraction);
  rep.add(prefix + "p_iso", "", c.p_iso);
  rep.add(prefix + "expected_isotropic", "", c.expected_isotropic);
  rep.add(prefix + "ratio", "", c.ratio);
  rep.add(prefix + "binom_tail", "", c.binom_tail);
}

void run_compton(RunReport& rep, const ComptonParams& p, std::uint64_t seed) {
  using namespace compton;
  const KinematicsParams kin(p.alpha);
  SimulationOptions opt;
  opt.theta_min = rad(p.theta_min_deg);
  opt.theta_max = rad(p.theta_max_deg);
  opt.background_fraction = p.background_fraction;
  const double sigma = rad(p.noise_deg);

  std::vector<ScatterEvent> events;
  if (p.hypothesis == "quantum") {
    events = simulate_events(p.n_events, Hypothesis::quantum, kin, sigma, derive_seed(seed, "quantum"), opt);
  } else if (p.hypothesis == "bks") {
    events = simulate_events(p.n_events, Hypothesis::bks, kin, sigma, derive_seed(seed, "bks"), opt);
  } else {
    const auto q = simulate_events(p.n_events, Hypothesis::quantum, kin, sigma, derive_seed(seed, "quantum"), opt);
    const auto b = simulate_events(p.n_events, Hypothesis::bks, kin, sigma, derive_seed(seed, "bks"), opt);
    events = mix_streams(q, b, p.q, derive_seed(seed, "mix"));
  }

  std::int64_t out_of_range = 0;
  for (const auto& ev : events) {
    if (!(ev.theta > 0.0 && ev.theta < kPi / 2 && ev.phi > 0.0 && ev.phi < kPi)) ++out_of_range;
  }
  rep.check("angles_in_range", static_cast<double>(out_of_range), 0.0);

  const auto report = coincidence_analysis(events, kin, p.window_deg);
  add_coincidence(rep, "", report);
  rep.add("ks_uniform_phi", "", ks_uniform_phi(events));
  rep.notes.push_back(report.note);

  const auto syn = synthetic_cloud_chamber(kin, p.synthetic_events, p.synthetic_hits, p.window_deg);
  const auto sr = coincidence_analysis(syn, kin, p.window_deg);
  add_coincidence(rep, "synthetic_", sr);
  rep.add("synthetic_four_times_consistent", "", sr.four_times_consistent ? 1.0 : 0.0);
  rep.check("synthetic_hits", std::abs(static_cast<double>(sr.hits - p.synthetic_hits)), 0.0);
  rep.notes.push_back("synthetic cloud-chamber set: ratio " + num(sr.ratio) +
                      (sr.four_times_consistent ? ", consistent with \"four times the number\""
                                                : ", not consistent with \"four times the number\""));
  rep.notes.push_back("exact binomial tail P(X >= " + std::to_string(sr.hits) + ") = " +
                      num(sr.binom_tail));

  Plot plot{"phi_vs_theta", "Photon angle vs recoil angle", "theta (deg)", "signed phi (deg)", {}};
  Series pts{"events", {}, {}, true};
  const std::size_t shown = std::min<std::size_t>(events.size(), 2000);
  for (std::size_t i = 0; i < shown; ++i) {
    pts.x.push_back(deg(events[i].theta));
    pts.y.push_back(deg(events[i].opposite_side ? events[i].phi : -events[i].phi));
  }
  Series curve{"tan(phi/2) = 1/((1+alpha) tan theta)", {}, {}, false};
  for (int k = 1; k < 180; ++k) {
    const double th = rad(0.5 * k);
    curve.x.push_back(0.5 * k);
    curve.y.push_back(deg(phi_of_theta(th, kin)));
  }
  plot.series = {pts, curve};
  rep.plots.push_back(std::move(plot));
}

}  // namespace

bool RunReport::invariants_pass() const {
  return std::all_of(invariants.begin(), invariants.end(), [](const auto& c) { return c.pass; });
}

void RunReport::check(std::string label, double residual, double tolerance) {
  invariants.push_back({std::move(label), residual, tolerance, residual <= tolerance});
}

void RunReport::require(std::string label, bool ok, double residual, double tolerance) {
  invariants.push_back({std::move(label), residual, tolerance, ok});
}

void RunReport::add(std::string quantity, std::string index, double value,
                    std::optional<double> residual) {
  records.push_back({std::move(quantity), std::move(index), value, residual});
}

Json config_echo(const ExperimentConfig& config) {
  Json j;
  j["kind"] = config.kind;
  if (config.seed) j["seed"] = *config.seed;
  j["parameters"] = config.parameters_echo;
  j["formats"] = config.formats;
  return j;
}

RunReport run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunReport rep;
  rep.kind = config.kind;
  rep.seed = config.seed;
  rep.config_echo = config_echo(config);
  const std::uint64_t seed = config.seed.value_or(0);
  try {
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, SewellParams>) run_sewell(rep, p, seed);
          else if constexpr (std::is_same_v<T, TwoStageParams>) run_two_stage(rep, p, seed);
          else if constexpr (std::is_same_v<T, ReverseParams>) run_reverse(rep, p, seed);
          else if constexpr (std::is_same_v<T, WayParams>) run_way(rep, p, seed);
          else if constexpr (std::is_same_v<T, ShimonyParams>) run_shimony(rep, p);
          else if constexpr (std::is_same_v<T, FineBrownParams>) run_fine_brown(rep, p);
          else run_compton(rep, p, seed);
        },
        config.parameters);
  } catch (const InvariantViolation& e) {
    rep.invariants.push_back({e.label(), e.residual(), 0.0, false});
    rep.notes.push_back(std::string("invariant violated: ") + e.what());
  } catch (const ContractViolation& e) {
    throw ConfigError("$.parameters", e.what());
  } catch (const ShapeError& e) {
    throw ConfigError("$.parameters", e.what());
  } catch (const CapacityError& e) {
    throw ConfigError("$.parameters", e.what());
  }
  rep.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace collapse_lab::cli

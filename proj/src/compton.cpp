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

#include "collapse_lab/compton.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/rng.hpp"

namespace collapse_lab::compton {

KinematicsParams::KinematicsParams(double a) : alpha(a) {
  if (!(a >= 0.0) || !std::isfinite(a)) throw ContractViolation("alpha must be finite and >= 0");
}

KinematicsParams KinematicsParams::from_lambda(double lambda_in_compton_units) {
  return KinematicsParams(alpha_of_lambda(lambda_in_compton_units));
}

std::string to_string(Hypothesis h) { return h == Hypothesis::quantum ? "QUANTUM" : "BKS"; }

double phi_of_theta(double theta, const KinematicsParams& params) {
  if (!(theta > 0.0 && theta < kPi / 2)) {
    throw ContractViolation("phi_of_theta: theta must lie in (0, pi/2)");
  }
  return 2.0 * std::atan(1.0 / ((1.0 + params.alpha) * std::tan(theta)));
}

double alpha_of_lambda(double lambda_in_compton_units) {
  if (!(lambda_in_compton_units > 0.0)) throw ContractViolation("lambda must be positive");
  return 1.0 / lambda_in_compton_units;
}

double theta_of_phi(double phi, const KinematicsParams& params) {
  if (!(phi > 0.0 && phi < kPi)) throw ContractViolation("theta_of_phi: phi must lie in (0, pi)");
  // phi_of_theta decreases from pi to 0 on (0, pi/2).
  double lo = 0.0, hi = kPi / 2;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= 0.0 || mid >= kPi / 2) break;
    if (phi_of_theta(mid, params) > phi) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double planar_miss(const ScatterEvent& ev, const KinematicsParams& params) {
  const double expected = phi_of_theta(ev.theta, params);
  const double observed = ev.opposite_side ? ev.phi : -ev.phi;
  const double d = std::abs(observed - expected);
  return std::min(d, 2.0 * kPi - d);
}

namespace {

void fill_chunk(std::vector<ScatterEvent>& out, std::int64_t begin, std::int64_t end,
                Hypothesis hypothesis, const KinematicsParams& params, double noise_sigma,
                std::uint64_t seed, const SimulationOptions& opt) {
  auto rng = make_rng(seed, "compton.events", static_cast<std::uint64_t>(begin / kEventChunk));
  std::uniform_real_distribution<double> theta_dist(opt.theta_min, opt.theta_max);
  std::uniform_real_distribution<double> phi_uniform(0.0, kPi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double phi_lo = std::nextafter(0.0, 1.0);
  const double phi_hi = std::nextafter(kPi, 0.0);

  for (std::int64_t i = begin; i < end; ++i) {
    ScatterEvent ev;
    ev.hypothesis = hypothesis;
    ev.noise_sigma = noise_sigma;
    ev.theta = theta_dist(rng);
    // Draw every variate unconditionally so the stream layout is fixed.
    const double u_phi = phi_uniform(rng);
    const double z = noise(rng);
    const double u_bg = unit(rng);
    const double u_side = unit(rng);
    const bool background = u_bg < opt.background_fraction;
    if (hypothesis == Hypothesis::bks || background) {
      // Any direction in the scattering plane: magnitude and side both free.
      ev.phi = std::clamp(u_phi, phi_lo, phi_hi);
      ev.opposite_side = u_side < 0.5;
    } else {
      ev.phi = std::clamp(phi_of_theta(ev.theta, params) + noise_sigma * z, phi_lo, phi_hi);
    }
    out[static_cast<std::size_t>(i)] = ev;
  }
}

}  // namespace

std::vector<ScatterEvent> simulate_events(std::int64_t n, Hypothesis hypothesis,
                                          const KinematicsParams& params, double noise_sigma,
                                          std::uint64_t seed, const SimulationOptions& options) {
  if (n < 1) throw ContractViolation("simulate_events: n must be >= 1");
  if (!(noise_sigma >= 0.0)) throw ContractViolation("simulate_events: noise_sigma must be >= 0");
  if (!(options.theta_min > 0.0 && options.theta_max < kPi / 2 &&
        options.theta_min < options.theta_max)) {
    throw ContractViolation("simulate_events: theta range must lie inside (0, pi/2)");
  }
  if (!(options.background_fraction >= 0.0 && options.background_fraction <= 1.0)) {
    throw ContractViolation("simulate_events: background fraction must lie in [0, 1]");
  }
  std::vector<ScatterEvent> out(static_cast<std::size_t>(n));
  const std::int64_t chunks = (n + kEventChunk - 1) / kEventChunk;
  if (options.execution == kernels::Execution::serial) {
    for (std::int64_t c = 0; c < chunks; ++c) {
      fill_chunk(out, c * kEventChunk, std::min(n, (c + 1) * kEventChunk), hypothesis, params,
                 noise_sigma, seed, options);
    }
  } else {
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < chunks; ++c) {
      fill_chunk(out, c * kEventChunk, std::min(n, (c + 1) * kEventChunk), hypothesis, params,
                 noise_sigma, seed, options);
    }
  }
  return out;
}

double binomial_upper_tail(std::int64_t n, std::int64_t k, double p) {
  if (n < 0 || !(p >= 0.0 && p <= 1.0)) throw ContractViolation("binomial_upper_tail: bad arguments");
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  const double lp = std::log(p), lq = std::log1p(-p);
  const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
  // Sum largest terms last-to-first for accuracy.
  double total = 0.0;
  for (std::int64_t j = n; j >= k; --j) {
    const double lt = lgn - std::lgamma(static_cast<double>(j) + 1.0) -
                      std::lgamma(static_cast<double>(n - j) + 1.0) + static_cast<double>(j) * lp +
                      static_cast<double>(n - j) * lq;
    total += std::exp(lt);
  }
  return std::min(1.0, total);
}

CoincidenceReport coincidence_analysis(std::span<const ScatterEvent> events,
                                       const KinematicsParams& params, double window_deg) {
  if (events.empty()) throw ContractViolation("coincidence_analysis: no events");
  if (!(window_deg > 0.0 && window_deg <= 180.0)) {
    throw ContractViolation("coincidence_analysis: window must lie in (0, 180] degrees");
  }
  CoincidenceReport rep;
  rep.n_events = static_cast<std::int64_t>(events.size());
  rep.window = rad(window_deg);
  for (const auto& ev : events) {
    if (planar_miss(ev, params) <= rep.window) ++rep.hits;
  }
  // Planar window: a uniform direction in the plane lands within +-window of
  // the predicted one with chance 2w/360.
  rep.p_iso = 2.0 * window_deg / 360.0;
  rep.hit_fraction = static_cast<double>(rep.hits) / static_cast<double>(rep.n_events);
  rep.expected_isotropic = static_cast<double>(rep.n_events) * rep.p_iso;
  rep.ratio = static_cast<double>(rep.hits) / rep.expected_isotropic;
  rep.binom_tail = binomial_upper_tail(rep.n_events, rep.hits, rep.p_iso);
  rep.four_times_consistent = rep.ratio >= 3.5 && rep.ratio < 5.0;
  rep.note = "planar window convention (p_iso = 2*window/360); binom_tail is the exact "
             "binomial P(X >= hits) and does not reproduce the quoted 'about 1/250' chance "
             "figure, whose statistic is unspecified";
  return rep;
}

std::vector<ScatterEvent> synthetic_cloud_chamber(const KinematicsParams& params, std::int64_t n,
                                                  std::int64_t hits, double window_deg) {
  if (n < 1 || hits < 0 || hits > n) throw ContractViolation("synthetic_cloud_chamber: bad counts");
  const double w = rad(window_deg);
  std::vector<ScatterEvent> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    // Recoil angles spread evenly over (10deg, 80deg).
    const double theta = rad(10.0 + 70.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n));
    const double phi0 = phi_of_theta(theta, params);
    ScatterEvent ev;
    ev.theta = theta;
    ev.hypothesis = Hypothesis::quantum;
    if (i < hits) {
      ev.phi = phi0;
    } else {
      // Put the miss on whichever side has room, 2.5 windows off the curve.
      const double off = 2.5 * w;
      ev.phi = phi0 + off < kPi ? phi0 + off : phi0 - off;
      if (!(ev.phi > 0.0 && ev.phi < kPi)) {
        throw ContractViolation("synthetic_cloud_chamber: window too wide to place a miss");
      }
      ev.hypothesis = Hypothesis::bks;
    }
    out.push_back(ev);
  }
  return out;
}

std::vector<ScatterEvent> mix_streams(std::span<const ScatterEvent> quantum,
                                      std::span<const ScatterEvent> bks, double q,
                                      std::uint64_t seed) {
  if (!(q >= 0.0 && q <= 1.0)) throw ContractViolation("mix_streams: q must lie in [0, 1]");
  if (quantum.size() != bks.size()) throw ShapeError("mix_streams: streams differ in length");
  auto rng = make_rng(seed, "compton.mix");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ScatterEvent> out;
  out.reserve(quantum.size());
  for (std::size_t i = 0; i < quantum.size(); ++i) {
    out.push_back(unit(rng) < q ? quantum[i] : bks[i]);
  }
  return out;
}

double ks_uniform_phi(std::span<const ScatterEvent> events) {
  if (events.empty()) throw ContractViolation("ks_uniform_phi: no events");
  std::vector<double> x;
  x.reserve(events.size());
  for (const auto& ev : events) x.push_back(ev.phi / kPi);
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = std::clamp(x[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace collapse_lab::compton

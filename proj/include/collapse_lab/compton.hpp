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

// Compton-Simon recoil kinematics and the coincidence Monte Carlo.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "collapse_lab/kernels.hpp"

namespace collapse_lab::compton {

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg(double radians) { return radians * 180.0 / kPi; }
constexpr double rad(double degrees) { return degrees * kPi / 180.0; }

struct KinematicsParams {
  double alpha = 0.0;

  explicit KinematicsParams(double a = 0.0);
  static KinematicsParams from_lambda(double lambda_in_compton_units);
};

enum class Hypothesis { quantum, bks };
std::string to_string(Hypothesis h);

// theta and phi are magnitudes; the photon and electron leave on opposite
// sides of the incident line, which is what the sign in the relation means.
struct ScatterEvent {
  double theta = 0.0;
  double phi = 0.0;
  Hypothesis hypothesis = Hypothesis::quantum;
  double noise_sigma = 0.0;
  bool opposite_side = true;
};

// tan(phi/2) = 1 / ((1 + alpha) tan theta), theta in (0, pi/2).
double phi_of_theta(double theta, const KinematicsParams& params);
double alpha_of_lambda(double lambda_in_compton_units);
// Angle in the scattering plane between the observed photon direction and the
// one predicted from theta; same-side photons count as negative angles.
double planar_miss(const ScatterEvent& event, const KinematicsParams& params);

// Bisection inverse of phi_of_theta; phi in (0, pi).
double theta_of_phi(double phi, const KinematicsParams& params);

struct SimulationOptions {
  double theta_min = rad(5.0);
  double theta_max = rad(85.0);
  // Fraction of events replaced by uniform background tracks.
  double background_fraction = 0.0;
  kernels::Execution execution = kernels::Execution::parallel;
};

inline constexpr std::int64_t kEventChunk = 4096;

std::vector<ScatterEvent> simulate_events(std::int64_t n, Hypothesis hypothesis,
                                          const KinematicsParams& params, double noise_sigma,
                                          std::uint64_t seed, const SimulationOptions& options = {});

struct CoincidenceReport {
  std::int64_t n_events = 0;
  double window = rad(20.0);
  std::int64_t hits = 0;
  double p_iso = 0.0;
  double hit_fraction = 0.0;
  double expected_isotropic = 0.0;
  double ratio = 0.0;
  double binom_tail = 0.0;
  bool four_times_consistent = false;
  std::string note;
};

CoincidenceReport coincidence_analysis(std::span<const ScatterEvent> events,
                                       const KinematicsParams& params, double window_deg = 20.0);

// P(X >= k) for X ~ Binomial(n, p), summed exactly in log space.
double binomial_upper_tail(std::int64_t n, std::int64_t k, double p);

// Deterministic 38-event set with exactly 18 hits, as in the cloud-chamber
// count: hits sit on the kinematic curve, misses are placed outside the window.
std::vector<ScatterEvent> synthetic_cloud_chamber(const KinematicsParams& params,
                                                  std::int64_t n = 38, std::int64_t hits = 18,
                                                  double window_deg = 20.0);

// Interleaves two streams: event i comes from `quantum` with probability q.
std::vector<ScatterEvent> mix_streams(std::span<const ScatterEvent> quantum,
                                      std::span<const ScatterEvent> bks, double q,
                                      std::uint64_t seed);

// Two-sided Kolmogorov-Smirnov distance of |phi| against uniform on (0, pi).
double ks_uniform_phi(std::span<const ScatterEvent> events);

}  // namespace collapse_lab::compton

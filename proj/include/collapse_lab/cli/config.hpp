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

// Declarative run configuration: one JSON document per run.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "collapse_lab/qalgebra.hpp"
#include "collapse_lab/sewell.hpp"

namespace collapse_lab::cli {

using Json = nlohmann::ordered_json;
using qalgebra::Complex;

/// Validation failure; `path` is a JSON pointer-like location such as
/// "$.parameters.taus".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

inline constexpr double kAmplitudeTol = 1e-9;

struct SewellParams {
  std::vector<double> lambdas;
  std::vector<double> energies;
  std::vector<Complex> amplitudes;
  qalgebra::Index cell_dim = 2;
  double tau = 1.0;
  sewell::HaMode h_a_mode = sewell::HaMode::zero;
  std::vector<double> rest_spectrum;
  /// Trajectory sample times; empty means 41 points on [0, 2 tau].
  std::vector<double> times;
  /// |sum |c|^2 - 1| when the input was within kAmplitudeTol but not exact.
  double renormalized_by = 0.0;
};

struct TwoStageParams {
  SewellParams first;
  qalgebra::Index cell_dim2 = 2;
  double tau2 = 1.0;
  sewell::HaMode h_a_mode2 = sewell::HaMode::zero;
};

struct ReverseParams {
  SewellParams base;
  int j = 0;
};

struct WayParams {
  int min_dim = 3;
  int max_dim = 9;
  int restarts = 8;
  int evaluations = 20000;
  int samples = 10000;
  int sweep_min_dim = 2;
  int sweep_max_dim = 9;
  double min_m_squared = 1.0;
};

struct ShimonyParams {
  double leak = 0.05;
  std::vector<double> deltas{0.1, 0.01};
  std::vector<Complex> input;  // empty: equal superposition
};

struct EnsembleSpec {
  std::vector<double> weights;
  std::vector<std::vector<Complex>> states;
};

struct FineBrownParams {
  std::string unitary = "controlled_shift";
  std::vector<EnsembleSpec> probes;  // empty: |0>, |1>, (|0>+|1>)/sqrt2
};

struct ComptonParams {
  std::int64_t n_events = 100000;
  std::string hypothesis = "bks";  // quantum | bks | mixed
  double q = 0.5;                  // quantum fraction for "mixed"
  double alpha = 0.5;
  double noise_deg = 10.0;
  double window_deg = 20.0;
  double theta_min_deg = 5.0;
  double theta_max_deg = 85.0;
  double background_fraction = 0.0;
  std::int64_t synthetic_events = 38;
  std::int64_t synthetic_hits = 18;
};

using Parameters = std::variant<SewellParams, TwoStageParams, ReverseParams, WayParams,
                                ShimonyParams, FineBrownParams, ComptonParams>;

struct ExperimentConfig {
  std::string kind;
  std::optional<std::uint64_t> seed;
  Parameters parameters;
  /// Parameters exactly as given, echoed into the report.
  Json parameters_echo;
  std::optional<std::string> output;
  std::vector<std::string> formats{"csv", "json"};
};

const std::vector<std::string>& known_kinds();
bool is_stochastic(const ExperimentConfig& config);

ExperimentConfig parse_config(const Json& doc);
/// Reads and parses a config file; unreadable files raise ConfigError with
/// path "$" and the file name in the message.
ExperimentConfig load_config(const std::filesystem::path& file);

std::vector<std::string> parse_formats(const std::string& comma_list);

}  // namespace collapse_lab::cli

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

// Executes one configured experiment and collects everything it measured.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "collapse_lab/cli/config.hpp"

namespace collapse_lab::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kInvariantFailure = 3, kIoError = 4 };

struct Record {
  std::string quantity;
  std::string index;
  double value = 0.0;
  std::optional<double> residual;
};

/// One checked invariant. `pass` is residual <= tolerance unless the check
/// is a lower bound, in which case it is stated in `label`.
struct InvariantCheck {
  std::string label;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool scatter = false;
};

struct Plot {
  std::string stem;
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

struct ManifestEntry {
  std::string file;
  std::string sha256;
};

struct RunReport {
  std::string kind;
  std::optional<std::uint64_t> seed;
  Json config_echo;
  std::vector<Record> records;
  std::vector<InvariantCheck> invariants;
  std::vector<Plot> plots;
  std::vector<std::string> notes;
  /// Printed, never written into artifacts, so digests stay reproducible.
  double wall_clock_seconds = 0.0;
  std::vector<ManifestEntry> manifest;

  bool invariants_pass() const;
  int exit_code() const { return invariants_pass() ? kOk : kInvariantFailure; }
  void check(std::string label, double residual, double tolerance);
  void require(std::string label, bool ok, double residual = 0.0, double tolerance = 0.0);
  void add(std::string quantity, std::string index, double value,
           std::optional<double> residual = std::nullopt);
};

/// Runs the experiment without touching the filesystem. Library contract
/// violations surface as ConfigError (bad parameters); invariant failures
/// are recorded in the report rather than thrown.
RunReport run_experiment(const ExperimentConfig& config);

Json config_echo(const ExperimentConfig& config);

}  // namespace collapse_lab::cli

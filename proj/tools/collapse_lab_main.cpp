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

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "collapse_lab/cli/config.hpp"
#include "collapse_lab/cli/emit.hpp"
#include "collapse_lab/cli/runner.hpp"

namespace cl = collapse_lab::cli;

namespace {

cl::Json read_document(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw cl::ConfigError("$", "cannot read config file " + file);
  try {
    return cl::Json::parse(in);
  } catch (const cl::Json::parse_error& e) {
    throw cl::ConfigError("$", std::string("malformed JSON: ") + e.what());
  }
}

std::string output_dir(const cl::ExperimentConfig& cfg, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (cfg.output) return *cfg.output;
  if (const char* env = std::getenv("COLLAPSE_LAB_OUT"); env && *env) return env;
  return "collapse-lab-out";
}

int print_report(const cl::RunReport& rep) {
  for (const auto& c : rep.invariants) {
    std::cout << (c.pass ? "ok    " : "FAIL  ") << c.label << "  residual=" << cl::format_number(c.residual)
              << "  tol=" << cl::format_number(c.tolerance) << "\n";
  }
  for (const auto& n : rep.notes) std::cout << "note  " << n << "\n";
  for (const auto& m : rep.manifest) std::cout << m.sha256 << "  " << m.file << "\n";
  std::cout << "wall-clock " << rep.wall_clock_seconds << " s\n";
  return rep.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"collapse-lab: Sewell measurement model, no-go checks and Compton coincidences"};
  app.require_subcommand(1);

  std::string config_file, out_flag, formats_flag;
  std::optional<std::uint64_t> seed_flag;
  auto* run = app.add_subcommand("run", "Run one experiment and write its outputs");
  run->add_option("config", config_file, "Experiment config (JSON)")->required();
  run->add_option("--out", out_flag, "Output directory (default: config, then $COLLAPSE_LAB_OUT)");
  run->add_option("--formats", formats_flag, "Comma-separated subset of csv,json,svg");
  run->add_option("--seed", seed_flag, "Override the config seed");

  std::string validate_file;
  auto* validate = app.add_subcommand("validate", "Check a config against the schema");
  validate->add_option("config", validate_file, "Experiment config (JSON)")->required();

  auto* list = app.add_subcommand("list-kinds", "List experiment kinds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cl::kConfigError;
  }

  try {
    if (*list) {
      for (const auto& k : cl::known_kinds()) std::cout << k << "\n";
      return cl::kOk;
    }
    if (*validate) {
      const auto cfg = cl::parse_config(read_document(validate_file));
      std::cout << "valid: kind " << cfg.kind << "\n";
      return cl::kOk;
    }
    auto doc = read_document(config_file);
    if (seed_flag && doc.is_object()) doc["seed"] = *seed_flag;
    auto cfg = cl::parse_config(doc);
    if (!formats_flag.empty()) cfg.formats = cl::parse_formats(formats_flag);
    auto rep = cl::run_experiment(cfg);
    rep.manifest = cl::emit_report(rep, output_dir(cfg, out_flag), cfg.formats);
    return print_report(rep);
  } catch (const cl::ConfigError& e) {
    std::cerr << "config error at " << e.what() << "\n";
    return cl::kConfigError;
  } catch (const cl::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return cl::kIoError;
  }
}

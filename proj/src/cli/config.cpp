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

#include "collapse_lab/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace collapse_lab::cli {

namespace {

std::string join(const std::string& path, const std::string& key) { return path + "." + key; }
std::string at(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void require_object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

void check_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  require_object(j, path);
  for (const auto& item : j.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                [&](const char* a) { return item.key() == a; });
    if (!ok) throw ConfigError(join(path, item.key()), "unknown key \"" + item.key() + "\"");
  }
}

double as_double(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

std::int64_t as_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  if (j.is_number_unsigned() && j.get<std::uint64_t>() >
                                    static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    throw ConfigError(path, "integer out of range");
  }
  return j.get<std::int64_t>();
}

std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

double get_double(const Json& obj, const std::string& path, const char* key, double fallback) {
  return obj.contains(key) ? as_double(obj.at(key), join(path, key)) : fallback;
}

std::int64_t get_int(const Json& obj, const std::string& path, const char* key,
                     std::int64_t fallback, std::int64_t lo, std::int64_t hi) {
  if (!obj.contains(key)) return fallback;
  const auto v = as_int(obj.at(key), join(path, key));
  if (v < lo || v > hi) {
    throw ConfigError(join(path, key), "must lie in [" + std::to_string(lo) + ", " +
                                           std::to_string(hi) + "]");
  }
  return v;
}

std::vector<double> get_doubles(const Json& obj, const std::string& path, const char* key) {
  std::vector<double> out;
  if (!obj.contains(key)) return out;
  const auto& arr = obj.at(key);
  const auto p = join(path, key);
  if (!arr.is_array()) throw ConfigError(p, "expected an array of numbers");
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(as_double(arr[i], at(p, i)));
  return out;
}

Complex as_complex(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected a [re, im] pair");
  return {as_double(j[0], at(path, 0)), as_double(j[1], at(path, 1))};
}

std::vector<Complex> as_complex_vector(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a nonempty array of [re, im] pairs");
  std::vector<Complex> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_complex(j[i], at(path, i)));
  return out;
}

double norm_deviation(const std::vector<Complex>& c) {
  double s = 0.0;
  for (const auto& z : c) s += std::norm(z);
  return std::abs(s - 1.0);
}

// Inputs off by more than kAmplitudeTol are rejected; smaller drift (from
// printing amplitudes to finite precision) is rescaled and reported.
std::vector<Complex> normalized_amplitudes(std::vector<Complex> c, const std::string& path,
                                           double* renormalized_by) {
  const double dev = norm_deviation(c);
  if (dev > kAmplitudeTol) {
    std::ostringstream os;
    os << "amplitudes are not normalized (|sum |c|^2 - 1| = " << dev << ")";
    throw ConfigError(path, os.str());
  }
  if (dev > 1e-15) {
    double s = 0.0;
    for (const auto& z : c) s += std::norm(z);
    for (auto& z : c) z /= std::sqrt(s);
    if (renormalized_by) *renormalized_by = dev;
  }
  return c;
}

sewell::HaMode as_ha_mode(const Json& j, const std::string& path) {
  const auto s = as_string(j, path);
  if (s == "zero") return sewell::HaMode::zero;
  if (s == "cell_commuting") return sewell::HaMode::cell_commuting;
  throw ConfigError(path, "h_a_mode must be \"zero\" or \"cell_commuting\"");
}

double positive(double v, const std::string& path) {
  if (!(v > 0.0)) throw ConfigError(path, "must be positive");
  return v;
}

#define SEWELL_KEYS "lambdas", "energies", "amplitudes", "cell_dim", "tau", "h_a_mode", \
                    "rest_spectrum", "times"

SewellParams parse_sewell_fields(const Json& p, const std::string& path) {
  SewellParams s;
  if (!p.contains("lambdas")) throw ConfigError(join(path, "lambdas"), "missing required key");
  if (!p.contains("amplitudes")) throw ConfigError(join(path, "amplitudes"), "missing required key");
  s.lambdas = get_doubles(p, path, "lambdas");
  const std::size_t n = s.lambdas.size();
  if (n < 2 || n > 16) throw ConfigError(join(path, "lambdas"), "need between 2 and 16 eigenvalues");
  auto sorted = s.lambdas;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError(join(path, "lambdas"), "eigenvalues must be pairwise distinct");
  }
  s.energies = get_doubles(p, path, "energies");
  if (s.energies.empty()) s.energies.assign(n, 0.0);
  if (s.energies.size() != n) throw ConfigError(join(path, "energies"), "length must match lambdas");
  const auto amp_path = join(path, "amplitudes");
  auto amps = as_complex_vector(p.at("amplitudes"), amp_path);
  if (amps.size() != n) throw ConfigError(amp_path, "length must match lambdas");
  s.amplitudes = normalized_amplitudes(std::move(amps), amp_path, &s.renormalized_by);
  s.cell_dim = get_int(p, path, "cell_dim", 2, 1, 256);
  s.tau = positive(get_double(p, path, "tau", 1.0), join(path, "tau"));
  if (p.contains("h_a_mode")) s.h_a_mode = as_ha_mode(p.at("h_a_mode"), join(path, "h_a_mode"));
  s.rest_spectrum = get_doubles(p, path, "rest_spectrum");
  if (!s.rest_spectrum.empty() && static_cast<qalgebra::Index>(s.rest_spectrum.size()) != s.cell_dim) {
    throw ConfigError(join(path, "rest_spectrum"), "length must equal cell_dim");
  }
  s.times = get_doubles(p, path, "times");
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    if (s.times[i] < 0.0) throw ConfigError(at(join(path, "times"), i), "times must be >= 0");
  }
  return s;
}

SewellParams parse_sewell(const Json& p, const std::string& path) {
  check_keys(p, path, {SEWELL_KEYS});
  return parse_sewell_fields(p, path);
}

TwoStageParams parse_two_stage(const Json& p, const std::string& path) {
  check_keys(p, path, {SEWELL_KEYS, "second"});
  TwoStageParams t;
  t.first = parse_sewell_fields(p, path);
  if (p.contains("second")) {
    const auto sp = join(path, "second");
    const auto& s = p.at("second");
    check_keys(s, sp, {"cell_dim", "tau", "h_a_mode"});
    t.cell_dim2 = get_int(s, sp, "cell_dim", 2, 1, 256);
    t.tau2 = positive(get_double(s, sp, "tau", 1.0), join(sp, "tau"));
    if (s.contains("h_a_mode")) t.h_a_mode2 = as_ha_mode(s.at("h_a_mode"), join(sp, "h_a_mode"));
  }
  return t;
}

ReverseParams parse_reverse(const Json& p, const std::string& path) {
  check_keys(p, path, {SEWELL_KEYS, "j"});
  ReverseParams r;
  r.base = parse_sewell_fields(p, path);
  r.j = static_cast<int>(get_int(p, path, "j", 0, 0,
                                 static_cast<std::int64_t>(r.base.lambdas.size()) - 1));
  return r;
}

WayParams parse_way(const Json& p, const std::string& path) {
  check_keys(p, path, {"min_dim", "max_dim", "restarts", "evaluations", "samples",
                       "sweep_min_dim", "sweep_max_dim", "min_m_squared"});
  WayParams w;
  w.min_dim = static_cast<int>(get_int(p, path, "min_dim", w.min_dim, 2, 32));
  w.max_dim = static_cast<int>(get_int(p, path, "max_dim", w.max_dim, w.min_dim, 32));
  w.restarts = static_cast<int>(get_int(p, path, "restarts", w.restarts, 1, 1000));
  w.evaluations = static_cast<int>(get_int(p, path, "evaluations", w.evaluations, 1, 10000000));
  w.samples = static_cast<int>(get_int(p, path, "samples", w.samples, 0, 10000000));
  w.sweep_min_dim = static_cast<int>(get_int(p, path, "sweep_min_dim", w.sweep_min_dim, 2, 32));
  w.sweep_max_dim =
      static_cast<int>(get_int(p, path, "sweep_max_dim", w.sweep_max_dim, w.sweep_min_dim, 32));
  w.min_m_squared = get_double(p, path, "min_m_squared", w.min_m_squared);
  if (w.min_m_squared < 0.0) throw ConfigError(join(path, "min_m_squared"), "must be >= 0");
  return w;
}

ShimonyParams parse_shimony(const Json& p, const std::string& path) {
  check_keys(p, path, {"leak", "deltas", "input"});
  ShimonyParams s;
  s.leak = get_double(p, path, "leak", s.leak);
  if (s.leak < 0.0 || s.leak > 1.0) throw ConfigError(join(path, "leak"), "must lie in [0, 1]");
  if (p.contains("deltas")) s.deltas = get_doubles(p, path, "deltas");
  if (p.contains("input")) {
    const auto ip = join(path, "input");
    s.input = normalized_amplitudes(as_complex_vector(p.at("input"), ip), ip, nullptr);
    if (s.input.size() != 2) throw ConfigError(ip, "input must be a qubit state");
  }
  return s;
}

FineBrownParams parse_fine_brown(const Json& p, const std::string& path) {
  check_keys(p, path, {"unitary", "probes"});
  FineBrownParams f;
  if (p.contains("unitary")) {
    f.unitary = as_string(p.at("unitary"), join(path, "unitary"));
    if (f.unitary != "controlled_shift" && f.unitary != "identity") {
      throw ConfigError(join(path, "unitary"), "must be \"controlled_shift\" or \"identity\"");
    }
  }
  if (p.contains("probes")) {
    const auto pp = join(path, "probes");
    const auto& arr = p.at("probes");
    if (!arr.is_array()) throw ConfigError(pp, "expected an array of ensembles");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto ep = at(pp, i);
      check_keys(arr[i], ep, {"weights", "states"});
      EnsembleSpec e;
      e.weights = get_doubles(arr[i], ep, "weights");
      if (!arr[i].contains("states") || !arr[i].at("states").is_array()) {
        throw ConfigError(join(ep, "states"), "expected an array of qubit states");
      }
      const auto& states = arr[i].at("states");
      for (std::size_t k = 0; k < states.size(); ++k) {
        const auto sp = at(join(ep, "states"), k);
        auto v = normalized_amplitudes(as_complex_vector(states[k], sp), sp, nullptr);
        if (v.size() != 2) throw ConfigError(sp, "probe states must be qubit states");
        e.states.push_back(std::move(v));
      }
      if (e.weights.size() != e.states.size() || e.states.empty()) {
        throw ConfigError(ep, "weights and states must be nonempty and of equal length");
      }
      double total = 0.0;
      for (double w : e.weights) {
        if (!(w > 0.0)) throw ConfigError(join(ep, "weights"), "weights must be positive");
        total += w;
      }
      if (std::abs(total - 1.0) > kAmplitudeTol) {
        throw ConfigError(join(ep, "weights"), "weights must sum to 1");
      }
      f.probes.push_back(std::move(e));
    }
  }
  return f;
}

ComptonParams parse_compton(const Json& p, const std::string& path) {
  check_keys(p, path, {"n_events", "hypothesis", "q", "alpha", "lambda", "noise_deg",
                       "window_deg", "theta_min_deg", "theta_max_deg", "background_fraction",
                       "synthetic_events", "synthetic_hits"});
  ComptonParams c;
  c.n_events = get_int(p, path, "n_events", c.n_events, 1, 100000000);
  if (p.contains("hypothesis")) {
    c.hypothesis = as_string(p.at("hypothesis"), join(path, "hypothesis"));
    if (c.hypothesis != "quantum" && c.hypothesis != "bks" && c.hypothesis != "mixed") {
      throw ConfigError(join(path, "hypothesis"), "must be \"quantum\", \"bks\" or \"mixed\"");
    }
  }
  c.q = get_double(p, path, "q", c.q);
  if (c.q < 0.0 || c.q > 1.0) throw ConfigError(join(path, "q"), "must lie in [0, 1]");
  if (p.contains("alpha") && p.contains("lambda")) {
    throw ConfigError(join(path, "lambda"), "give either alpha or lambda, not both");
  }
  c.alpha = get_double(p, path, "alpha", c.alpha);
  if (c.alpha < 0.0) throw ConfigError(join(path, "alpha"), "must be >= 0");
  if (p.contains("lambda")) c.alpha = 1.0 / positive(get_double(p, path, "lambda", 1.0), join(path, "lambda"));
  c.noise_deg = get_double(p, path, "noise_deg", c.noise_deg);
  if (c.noise_deg < 0.0) throw ConfigError(join(path, "noise_deg"), "must be >= 0");
  c.window_deg = get_double(p, path, "window_deg", c.window_deg);
  if (!(c.window_deg > 0.0 && c.window_deg <= 180.0)) {
    throw ConfigError(join(path, "window_deg"), "must lie in (0, 180]");
  }
  c.theta_min_deg = get_double(p, path, "theta_min_deg", c.theta_min_deg);
  c.theta_max_deg = get_double(p, path, "theta_max_deg", c.theta_max_deg);
  if (!(c.theta_min_deg > 0.0 && c.theta_min_deg < c.theta_max_deg && c.theta_max_deg < 90.0)) {
    throw ConfigError(join(path, "theta_min_deg"), "theta range must satisfy 0 < min < max < 90");
  }
  c.background_fraction = get_double(p, path, "background_fraction", c.background_fraction);
  if (c.background_fraction < 0.0 || c.background_fraction > 1.0) {
    throw ConfigError(join(path, "background_fraction"), "must lie in [0, 1]");
  }
  c.synthetic_events = get_int(p, path, "synthetic_events", c.synthetic_events, 1, 1000000);
  c.synthetic_hits = get_int(p, path, "synthetic_hits", c.synthetic_hits, 0, c.synthetic_events);
  return c;
}

}  // namespace

const std::vector<std::string>& known_kinds() {
  static const std::vector<std::string> kinds{"sewell", "two_stage", "reverse", "way",
                                              "shimony", "fine_brown", "compton"};
  return kinds;
}

bool is_stochastic(const ExperimentConfig& config) {
  if (config.kind == "way" || config.kind == "compton") return true;
  return std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SewellParams>) {
          return p.h_a_mode == sewell::HaMode::cell_commuting;
        } else if constexpr (std::is_same_v<T, TwoStageParams>) {
          return p.first.h_a_mode == sewell::HaMode::cell_commuting ||
                 p.h_a_mode2 == sewell::HaMode::cell_commuting;
        } else if constexpr (std::is_same_v<T, ReverseParams>) {
          return p.base.h_a_mode == sewell::HaMode::cell_commuting;
        } else {
          return false;
        }
      },
      config.parameters);
}

std::vector<std::string> parse_formats(const std::string& comma_list) {
  std::vector<std::string> out;
  std::stringstream ss(comma_list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item != "csv" && item != "json" && item != "svg") {
      throw ConfigError("$.formats", "unknown format \"" + item + "\"");
    }
    if (std::find(out.begin(), out.end(), item) == out.end()) out.push_back(item);
  }
  if (out.empty()) throw ConfigError("$.formats", "at least one format is required");
  return out;
}

ExperimentConfig parse_config(const Json& doc) {
  check_keys(doc, "$", {"kind", "seed", "parameters", "output", "formats"});
  ExperimentConfig cfg;
  if (!doc.contains("kind")) throw ConfigError("$.kind", "missing required key");
  cfg.kind = as_string(doc.at("kind"), "$.kind");
  const auto& kinds = known_kinds();
  if (std::find(kinds.begin(), kinds.end(), cfg.kind) == kinds.end()) {
    throw ConfigError("$.kind", "unknown kind \"" + cfg.kind + "\"");
  }
  if (doc.contains("seed")) {
    const auto& s = doc.at("seed");
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) throw ConfigError("$.seed", "expected a nonnegative 64-bit integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  const Json empty = Json::object();
  const Json& p = doc.contains("parameters") ? doc.at("parameters") : empty;
  const std::string pp = "$.parameters";
  cfg.parameters_echo = p;
  if (cfg.kind == "sewell") cfg.parameters = parse_sewell(p, pp);
  else if (cfg.kind == "two_stage") cfg.parameters = parse_two_stage(p, pp);
  else if (cfg.kind == "reverse") cfg.parameters = parse_reverse(p, pp);
  else if (cfg.kind == "way") cfg.parameters = parse_way(p, pp);
  else if (cfg.kind == "shimony") cfg.parameters = parse_shimony(p, pp);
  else if (cfg.kind == "fine_brown") cfg.parameters = parse_fine_brown(p, pp);
  else cfg.parameters = parse_compton(p, pp);

  if (doc.contains("output")) cfg.output = as_string(doc.at("output"), "$.output");
  if (doc.contains("formats")) {
    const auto& f = doc.at("formats");
    if (!f.is_array()) throw ConfigError("$.formats", "expected an array of strings");
    std::string joined;
    for (std::size_t i = 0; i < f.size(); ++i) {
      joined += (i ? "," : "") + as_string(f[i], at("$.formats", i));
    }
    cfg.formats = parse_formats(joined);
  }
  if (is_stochastic(cfg) && !cfg.seed) {
    throw ConfigError("$.seed", "seed is required for kind \"" + cfg.kind + "\" with these parameters");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("$", "cannot read config file " + file.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("$", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace collapse_lab::cli

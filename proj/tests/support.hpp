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

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "collapse_lab/sewell.hpp"

namespace support {

using collapse_lab::qalgebra::Complex;
using collapse_lab::qalgebra::Matrix;

inline std::vector<Complex> random_amplitudes(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Complex> c(static_cast<std::size_t>(n));
  double s = 0.0;
  for (auto& z : c) {
    z = Complex(g(rng), g(rng));
    s += std::norm(z);
  }
  for (auto& z : c) z /= std::sqrt(s);
  return c;
}

// Pairwise distinct by construction: sorted draws with a minimum gap.
inline std::vector<double> random_lambdas(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> l;
  while (static_cast<int>(l.size()) < n) {
    const double x = u(rng);
    if (std::all_of(l.begin(), l.end(), [x](double y) { return std::abs(x - y) > 1e-3; })) l.push_back(x);
  }
  return l;
}

inline std::vector<double> random_energies(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> e(static_cast<std::size_t>(n));
  for (auto& x : e) x = u(rng);
  return e;
}

inline Matrix random_hermitian(std::mt19937_64& rng, Eigen::Index d) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix h(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) h(i, j) = Complex(g(rng), g(rng));
  return 0.5 * (h + h.adjoint());
}

inline Matrix random_density(std::mt19937_64& rng, Eigen::Index d) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
  Matrix w = a * a.adjoint();
  return w / w.trace().real();
}

inline collapse_lab::sewell::SewellModel random_model(std::mt19937_64& rng, int n, Eigen::Index cell_dim,
                                                      double tau, bool cell_commuting) {
  using namespace collapse_lab::sewell;
  ObjectSpec obj(random_lambdas(rng, n), random_energies(rng, n), random_amplitudes(rng, n));
  PointerOptions opt;
  opt.h_a_mode = cell_commuting ? HaMode::cell_commuting : HaMode::zero;
  opt.seed = rng();
  return SewellModel(obj, build_pointer_apparatus(n, cell_dim, tau, opt), tau);
}

}  // namespace support

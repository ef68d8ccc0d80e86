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

// Serial reference vs OpenMP kernels. Pass the execution mode as the last
// benchmark argument: 0 = serial, 1 = parallel.
#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "collapse_lab/compton.hpp"
#include "collapse_lab/insolubility.hpp"
#include "collapse_lab/kernels.hpp"

using namespace collapse_lab;
using kernels::Execution;
using qalgebra::Complex;
using qalgebra::Index;
using qalgebra::Matrix;

namespace {

Execution mode(const benchmark::State& state, int arg) {
  return state.range(arg) == 0 ? Execution::serial : Execution::parallel;
}

Matrix random_matrix(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

void BM_Kron(benchmark::State& state) {
  const Matrix a = random_matrix(state.range(0), 1);
  const Matrix b = random_matrix(32, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::kron(a, b, mode(state, 1)));
}
BENCHMARK(BM_Kron)->ArgsProduct({{4, 8}, {0, 1}});

void BM_PartialTrace(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix w = random_matrix(n * 64, 3);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::partial_trace(w, n, 64, true, mode(state, 1)));
}
BENCHMARK(BM_PartialTrace)->ArgsProduct({{4, 8}, {0, 1}});

void BM_AssembleBlocks(benchmark::State& state) {
  const Index n = state.range(0);
  std::vector<Complex> c(static_cast<std::size_t>(n), Complex(1.0 / std::sqrt(double(n)), 0.0));
  std::vector<Matrix> blocks;
  for (Index i = 0; i < n * n; ++i) blocks.push_back(random_matrix(48, 10 + static_cast<std::uint64_t>(i)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::assemble_blocks(c, blocks, mode(state, 1)));
}
BENCHMARK(BM_AssembleBlocks)->ArgsProduct({{4, 8}, {0, 1}});

void BM_YanaseSweep(benchmark::State& state) {
  insolubility::YanaseSweepConfig cfg;
  cfg.samples = static_cast<int>(state.range(0));
  cfg.seed = 5;
  for (auto _ : state) benchmark::DoNotOptimize(insolubility::yanase_sweep(cfg, mode(state, 1)));
}
BENCHMARK(BM_YanaseSweep)->ArgsProduct({{500}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_SimulateEvents(benchmark::State& state) {
  compton::SimulationOptions opt;
  opt.execution = mode(state, 1);
  const compton::KinematicsParams p(0.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(compton::simulate_events(state.range(0), compton::Hypothesis::bks, p, 0.17, 9, opt));
}
BENCHMARK(BM_SimulateEvents)->ArgsProduct({{100000}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

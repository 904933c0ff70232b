// Copyright 2026 The hybridmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <vector>

#include "hybridmc/closures.hpp"
#include "hybridmc/lo_solvers.hpp"
#include "hybridmc/mc_engine.hpp"
#include "hybridmc/sn_reference.hpp"

using namespace hybridmc;

namespace {

void BM_Histories(benchmark::State& state) {
  const auto p = benchmark_problem();
  const auto mesh = build_uniform_mesh(p, 16);
  RunConfig cfg;
  cfg.histories = static_cast<std::uint64_t>(state.range(0));
  cfg.capture_mode = state.range(1) ? CaptureMode::implicit : CaptureMode::analog;
  cfg.workers = 1;
  for (auto _ : state) {
    auto t = run_histories(p, mesh, cfg);
    benchmark::DoNotOptimize(t.sum_wl.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Histories)->Args({100000, 0})->Args({100000, 1})->Unit(benchmark::kMillisecond);

void BM_HybridSolve(benchmark::State& state) {
  const auto p = benchmark_problem();
  const auto cells = static_cast<std::size_t>(state.range(0));
  const auto mesh = build_uniform_mesh(p, cells);
  auto c = diffusion_closures(cells);
  for (std::size_t i = 0; i < cells; ++i) c.eddington[i] = 0.25 + 0.01 * (i % 7);
  for (auto _ : state) {
    auto sol = solve_hybrid(p, mesh, c, Method::hqd);
    benchmark::DoNotOptimize(sol.phi.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HybridSolve)->Arg(64)->Arg(4096);

void BM_Sweep(benchmark::State& state) {
  const auto p = benchmark_problem();
  const auto cells = static_cast<std::size_t>(state.range(0));
  const auto mesh = build_uniform_mesh(p, cells);
  const auto quad = gauss_legendre(static_cast<std::size_t>(state.range(1)));
  const std::vector<double> source(cells, 0.5);
  for (auto _ : state) {
    auto flux = sweep(p, mesh, quad, source);
    benchmark::DoNotOptimize(flux.cell_average.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_Sweep)->Args({256, 64})->Args({1024, 256});

void BM_SourceIteration(benchmark::State& state) {
  const auto p = benchmark_problem();
  const auto mesh = build_uniform_mesh(p, 1024);
  const auto quad = gauss_legendre(1024);
  for (auto _ : state) {
    auto sol = source_iteration(p, mesh, quad);
    benchmark::DoNotOptimize(sol.moments.phi.data());
  }
}
BENCHMARK(BM_SourceIteration)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

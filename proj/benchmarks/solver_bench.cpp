#include <benchmark/benchmark.h>

#include <vector>

#include "emd/examples.hpp"
#include "emd/lattice.hpp"
#include "emd/pd_solver.hpp"

namespace {

using namespace emd;

// Fixed number of iterations on an n x n split-four problem.
void run_iterations(benchmark::State& state, Metric metric) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto [p0, p1] = examples::generate(
      examples::make_spec(examples::ExampleName::DiracSplit4, n));
  SolverConfig config;
  config.metric = metric;
  config.mu = config.tau = scaled_step(p0.grid());
  config.tol = 1e-300;
  config.max_iters = 100;
  config.residual_check_interval = config.max_iters;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(p0, p1, config).distance);
  }
  state.SetItemsProcessed(state.iterations() * config.max_iters);
  state.counters["N"] = static_cast<double>(n * n);
}

void BM_L1Iterations(benchmark::State& state) { run_iterations(state, Metric::L1); }
void BM_L2Iterations(benchmark::State& state) { run_iterations(state, Metric::L2); }

void BM_Divergence(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto grid = LatticeGrid::square(n);
  std::vector<double> flux(grid.size() * 2, 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t v = 0; v < 2; ++v) {
      if (!grid.is_last_along(i, v)) flux[i * 2 + v] = 1e-3 * static_cast<double>(i % 7);
    }
  }
  std::vector<double> out(grid.size());
  for (auto _ : state) {
    detail::divergence_into(grid, flux, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}

BENCHMARK(BM_L1Iterations)->RangeMultiplier(2)->Range(20, 320)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_L2Iterations)->RangeMultiplier(2)->Range(20, 320)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Divergence)->RangeMultiplier(4)->Range(16, 1024);

}  // namespace

BENCHMARK_MAIN();

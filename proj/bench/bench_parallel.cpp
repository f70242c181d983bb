// Serial reference (jobs = 1) against the OpenMP path for the sampled kernels.

#include <benchmark/benchmark.h>

#include <vector>

#include "portthermo/kernels.hpp"
#include "portthermo/scenarios.hpp"
#include "portthermo/stability.hpp"

using namespace portthermo;

namespace {

void BM_Validate(benchmark::State& state, const char* scenario) {
  const auto s = build_scenario(scenario);
  const int jobs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    Rng rng(0);
    auto report = validate(s.system, 200, rng, {.tolerances = {}, .jobs = jobs});
    benchmark::DoNotOptimize(report);
  }
  state.SetItemsProcessed(state.iterations() * 200);
}

void BM_LyapunovShell(benchmark::State& state) {
  const auto loop = closed_loop_mass_spring();
  const auto traj = integrate(loop.damped.system, std::vector<double>(6, 0.0), {}, 0.0, 5.0, {.h = 5e-3});
  const int jobs = static_cast<int>(state.range(0));
  const ShellSpec shell{0.05, 0.5, 2000};
  for (auto _ : state) {
    Rng rng(0);
    auto report = lyapunov_certificate(loop.damped.system, loop.shaped, shell, traj, rng, jobs);
    benchmark::DoNotOptimize(report);
  }
}

void BM_Sweep(benchmark::State& state) {
  const int jobs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto finals = kernels::map_indexed(16, jobs, [](std::size_t i) {
      const auto s = build_scenario("crn", {{"weights", Matrix{{0.25 + 0.25 * static_cast<double>(i)}}}});
      return integrate(s.system, s.x0, {}, 0.0, 2.0, {.h = 2e-3}).states.back();
    });
    benchmark::DoNotOptimize(finals);
  }
}

// jobs = 1 is the serial reference, 0 means every available thread
void job_counts(benchmark::internal::Benchmark* b) {
  for (int jobs : {1, 2, 4, 0}) b->Arg(jobs);
  b->UseRealTime()->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK_CAPTURE(BM_Validate, crn, "crn")->Apply(job_counts);
BENCHMARK_CAPTURE(BM_Validate, closed_loop, "closed_loop_mass_spring")->Apply(job_counts);
BENCHMARK(BM_LyapunovShell)->Apply(job_counts);
BENCHMARK(BM_Sweep)->Apply(job_counts);

BENCHMARK_MAIN();

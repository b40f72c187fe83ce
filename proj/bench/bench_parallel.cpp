#include <benchmark/benchmark.h>

#include "cycleforge/bautin.hpp"
#include "cycleforge/simulate.hpp"
#include "cycleforge/verify.hpp"

using namespace cycleforge;

namespace {

// Return-map scan over the two-cycle schedule; arg 0 is serial, 1 is OpenMP.
void BM_ScanReturns(benchmark::State& state) {
  const RealizedSchedule r = realize(schedule_small_apos(2, 1.0, -1.0), 0.05);
  const PlanarField f = canonical_field(r.apos());
  const SearchSetup s = search_setup(Regime::Apos, 1.0, -1.0);
  IntegratorConfig cfg;
  cfg.escape_box = s.escape_box;
  const std::vector<double> xs = geometric_ladder(s.interval.first, s.interval.second, static_cast<int>(state.range(1)));
  const bool parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(scan_returns(f, xs, cfg, parallel));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(xs.size()));
  state.counters["threads"] = parallel ? configured_threads() : 1;
}
BENCHMARK(BM_ScanReturns)->ArgsProduct({{0, 1}, {64}})->ArgNames({"parallel", "points"})->Unit(benchmark::kMillisecond);

// Batched oracle draws (conjugacy criterion); arg 0 is serial, 1 is OpenMP.
void BM_ConjugacyBatch(benchmark::State& state) {
  VerifyOptions opt;
  opt.parallel = state.range(0) != 0;
  opt.draws = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(run_criterion(6, opt));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_ConjugacyBatch)->ArgsProduct({{0, 1}, {100}})->ArgNames({"parallel", "draws"})->Unit(benchmark::kMillisecond);

// Lyapunov oracle draws with the binary128 series; arg 0 is serial, 1 is OpenMP.
void BM_LyapunovOracle(benchmark::State& state) {
  VerifyOptions opt;
  opt.parallel = state.range(0) != 0;
  opt.draws = 5;
  for (auto _ : state) benchmark::DoNotOptimize(run_criterion(1, opt));
}
BENCHMARK(BM_LyapunovOracle)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();

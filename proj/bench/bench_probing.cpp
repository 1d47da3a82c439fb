// Serial reference vs. parallel probing on the same presolved instances.
// The effort threshold is disabled so every worker runs to its pair cap.

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "generators.hpp"
#include "tcprobe/mps_io.hpp"
#include "tcprobe/parallel.hpp"
#include "tcprobe/pipeline.hpp"

using namespace tcprobe;

namespace {

struct Prepared {
  std::string name;
  PresolveOutput presolved;
  CmCt structures;
};

Config bench_config(int threads) {
  Config c;
  c.threads = threads;
  c.eff_threshold = INFINITY;
  c.time_limit_seconds = 600;
  return c;
}

const std::vector<std::unique_ptr<Prepared>>& instances() {
  static const auto all = [] {
    std::vector<std::pair<std::string, MipInstance>> raw;
    raw.emplace_back("window_12000",
                     testing::sliding_window_instance(12000, 20, 20));
    raw.emplace_back("window_3000_tight",
                     testing::sliding_window_instance(3000, 8, 3));
    raw.emplace_back("mixed_sparse_120",
                     read_mps(std::string(TCPROBE_TEST_DATA_DIR) +
                              "/mixed_sparse_120.mps"));
    std::vector<std::unique_ptr<Prepared>> out;
    const Config c = bench_config(1);
    for (auto& [name, inst] : raw) {
      auto p = std::make_unique<Prepared>();
      p->name = name;
      p->presolved = run_simple_presolve(inst, c.tol);
      p->structures = build_cm_ct(p->presolved, c.size_limit, c.work_limit);
      out.push_back(std::move(p));
    }
    return out;
  }();
  return all;
}

void report(benchmark::State& state, const Prepared& p, const ProbingResult& r) {
  state.SetLabel(p.name);
  state.counters["pairs"] = static_cast<double>(r.pairs_probed);
  state.counters["pairs_per_s"] = benchmark::Counter(
      static_cast<double>(r.pairs_probed), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_Serial(benchmark::State& state) {
  const Prepared& p = *instances()[state.range(0)];
  const Config config = bench_config(1);
  ProbingResult r;
  for (auto _ : state) {
    r = run_serial(p.presolved, p.structures, config);
    benchmark::DoNotOptimize(r.pairs_probed);
  }
  report(state, p, r);
}

void BM_Parallel(benchmark::State& state) {
  const Prepared& p = *instances()[state.range(0)];
  const Config config = bench_config(static_cast<int>(state.range(1)));
  ProbingResult r;
  for (auto _ : state) {
    r = run_parallel(p.presolved, p.structures, config);
    benchmark::DoNotOptimize(r.pairs_probed);
  }
  report(state, p, r);
}

}  // namespace

BENCHMARK(BM_Serial)->DenseRange(0, 2)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Parallel)
    ->ArgsProduct({{0, 1, 2}, {2, 4, 8}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "retro/billiard.hpp"
#include "retro/lattice.hpp"
#include "retro/rotation.hpp"

namespace {

std::vector<retro::RotationParams> workload(double eps, int cases) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<retro::RotationParams> out;
  for (int i = 0; i < cases; ++i) {
    const double x = unit(rng);
    out.push_back(retro::RotationParams::from_alpha(x, unit(rng), eps));
  }
  return out;
}

void BM_HitsNaive(benchmark::State& state) {
  const double eps = 1.0 / static_cast<double>(state.range(0));
  const auto params = workload(eps, 8);
  std::int64_t hits = 0;
  for (auto _ : state) {
    for (const auto& p : params) {
      auto seq = retro::hitting_times_naive(p, 100, retro::kStepCap);
      hits += static_cast<std::int64_t>(seq.size());
      benchmark::DoNotOptimize(seq);
    }
  }
  state.counters["hits/s"] = benchmark::Counter(static_cast<double>(hits), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_HitsNaive)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_HitsFast(benchmark::State& state) {
  const double eps = 1.0 / static_cast<double>(state.range(0));
  const auto params = workload(eps, 8);
  std::int64_t hits = 0;
  for (auto _ : state) {
    for (const auto& p : params) {
      auto seq = retro::hitting_times_fast(p, 100);
      hits += static_cast<std::int64_t>(seq.size());
      benchmark::DoNotOptimize(seq);
    }
  }
  state.counters["hits/s"] = benchmark::Counter(static_cast<double>(hits), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_HitsFast)->Arg(1000)->Arg(100000)->Unit(benchmark::kMicrosecond);

void BM_Trace(benchmark::State& state) {
  const auto ic = retro::InitialCondition::from_slope(0.37, 0.61803398874989);
  retro::TraceOptions opts;
  opts.record_events = false;
  opts.max_events = 1'000'000;
  for (auto _ : state) {
    auto rec = retro::trace(ic, 0.01, opts);
    benchmark::DoNotOptimize(rec);
  }
}
BENCHMARK(BM_Trace)->Unit(benchmark::kMicrosecond);

void BM_HaarSample(benchmark::State& state) {
  std::mt19937_64 rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(retro::haar_sample(rng));
}
BENCHMARK(BM_HaarSample);

void BM_CountInRect(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::vector<retro::AffineLattice> lattices;
  for (int i = 0; i < 64; ++i) lattices.push_back(retro::haar_sample(rng));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(retro::count_in_rect(lattices[i++ % lattices.size()], 10.0));
  }
}
BENCHMARK(BM_CountInRect);

}  // namespace
BENCHMARK_MAIN();

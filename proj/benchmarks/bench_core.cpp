#include <benchmark/benchmark.h>

#include "clt/analytics.hpp"
#include "clt/composition.hpp"
#include "clt/fit.hpp"
#include "clt/lgd.hpp"
#include "clt/proxies.hpp"
#include "clt/synth.hpp"

namespace {

clt::Trace synthetic(int steps, std::uint64_t seed = 1) {
  clt::SynthConfig c = clt::SynthConfig::defaults();
  c.steps = steps;
  c.seed = seed;
  return clt::generate(c).trace;
}

void BM_ComputeProxies(benchmark::State& state) {
  const auto trace = synthetic(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(clt::compute_proxies(trace));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ComputeProxies)->Arg(200)->Arg(2000);

void BM_ComputeCltCausal(benchmark::State& state) {
  const auto trace = synthetic(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(clt::compute_clt(trace, {}, {}, clt::NormMode::kCausal));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ComputeCltCausal)->Arg(200)->Arg(2000);

void BM_FitWeights(benchmark::State& state) {
  std::vector<clt::LabeledPoints> sets;
  for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(state.range(0)); ++s) {
    const auto t = synthetic(200, 100 + s);
    sets.push_back({clt::compute_clt(t, {}, {}, clt::NormMode::kOffline), t.error_labels()});
  }
  for (auto _ : state) benchmark::DoNotOptimize(clt::fit_weights(sets));
}
BENCHMARK(BM_FitWeights)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_FitWeightsJoint(benchmark::State& state) {
  std::vector<clt::LabeledPoints> sets;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto t = synthetic(200, 100 + s);
    sets.push_back({clt::compute_clt(t, {}, {}, clt::NormMode::kOffline), t.error_labels()});
  }
  clt::FitOptions o;
  o.joint = true;
  for (auto _ : state) benchmark::DoNotOptimize(clt::fit_weights(sets, o));
}
BENCHMARK(BM_FitWeightsJoint)->Unit(benchmark::kMillisecond);

void BM_KMeans(benchmark::State& state) {
  const auto trace = synthetic(static_cast<int>(state.range(0)));
  const auto points = clt::compute_clt(trace, {}, {}, clt::NormMode::kOffline);
  for (auto _ : state) benchmark::DoNotOptimize(clt::cluster_strategies(points, 3, 42));
}
BENCHMARK(BM_KMeans)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_LgdComparison(benchmark::State& state) {
  clt::SynthConfig c = clt::SynthConfig::defaults();
  c.steps = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        clt::compare_lgd(c, {}, {}, {0.1, 0.9, 0.0}, clt::default_interventions()));
  }
}
BENCHMARK(BM_LgdComparison)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

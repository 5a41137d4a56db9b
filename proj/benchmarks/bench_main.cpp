#include <benchmark/benchmark.h>

#include <vector>

#include "ehrcov/jet.hpp"
#include "ehrcov/scenarios.hpp"

using namespace ehrcov;

static void BM_JetMultiply(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  const std::vector<double> p{0.3, -0.2, 0.7, 1.1};
  const auto v = seed(std::span<const double>(p), depth);
  for (auto _ : state) {
    Jet f = v[0] * v[1];
    f = f * sin(v[2]) + v[3] * v[0];
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(BM_JetMultiply)->DenseRange(1, 4);

static void BM_Bracket(benchmark::State& state) {
  const Scenario sc = hopf();
  const auto b = lie_bracket(sc.field("Sigma"), sc.field("Lambda"));
  const Point p = sc.space->point({0.5, 0.5, 0.5, 0.5});
  for (auto _ : state) {
    const At at(sc.space, p, 3);
    benchmark::DoNotOptimize(b.values(at));
  }
}
BENCHMARK(BM_Bracket);

static void BM_NablaFrame(benchmark::State& state) {
  const Scenario sc = builtin_scenario(state.range(0) == 0 ? "trivial-r3" : "frame-bundle");
  const Frame f = sc.frame();
  std::vector<VectorField> all;
  for (const auto& x : f.fields()) {
    for (const auto& y : f.fields()) all.push_back(sc.nabla(x, y));
  }
  const Point p = sc.space->sample(1, 42)[0];
  for (auto _ : state) {
    const At at(sc.space, p, 3);
    for (const auto& n : all) benchmark::DoNotOptimize(n.values(at));
  }
  state.SetLabel(sc.name);
}
BENCHMARK(BM_NablaFrame)->Arg(0)->Arg(1);

static void BM_Verify(benchmark::State& state) {
  const Scenario sc = trivial_r3();
  SampleConfig cfg;
  cfg.samples = 5;
  for (auto _ : state) benchmark::DoNotOptimize(verify_scenario(sc, cfg));
}
BENCHMARK(BM_Verify)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "dgcg/insertion.hpp"
#include "dgcg/rng.hpp"

using namespace dgcg;

namespace {

DualVariable experiment1_dual() {
  const TimeGrid grid(50);
  FrequencySchedule s = spiral_schedule(grid.nodes(), 20);
  SparseMeasure truth;
  truth.alpha = truth.beta = 0.1;
  const Curve line = linear_curve({0.2, 0.2}, {0.8, 0.8}, grid);
  truth.add_atom(curve_energy(line, 0.1, 0.1), line);
  Measurements residual = synthesize(truth, s, grid);
  for (auto& row : residual)
    for (auto& v : row) v = -v;
  return DualVariable(std::move(s), std::move(residual));
}

}  // namespace

static void BM_InsertionValue(benchmark::State& state) {
  const DualVariable w = experiment1_dual();
  const TimeGrid grid(50);
  const Curve c = linear_curve({0.25, 0.2}, {0.75, 0.8}, grid);
  for (auto _ : state)
    benchmark::DoNotOptimize(insertion_value(c, w, 0.1, 0.1));
}
BENCHMARK(BM_InsertionValue);

static void BM_InsertionGradient(benchmark::State& state) {
  const DualVariable w = experiment1_dual();
  const TimeGrid grid(50);
  const Curve c = linear_curve({0.25, 0.2}, {0.75, 0.8}, grid);
  for (auto _ : state)
    benchmark::DoNotOptimize(insertion_gradient(c, w, 0.1, 0.1));
}
BENCHMARK(BM_InsertionGradient);

static void BM_Descend(benchmark::State& state) {
  const DualVariable w = experiment1_dual();
  const TimeGrid grid(50);
  const Curve start = linear_curve({0.3, 0.25}, {0.7, 0.7}, grid);
  const DescentConfig cfg;
  for (auto _ : state)
    benchmark::DoNotOptimize(descend(start, w, 0.1, 0.1, cfg));
}
BENCHMARK(BM_Descend)->Unit(benchmark::kMillisecond);

static void BM_SampleStart(benchmark::State& state) {
  const DualVariable w = experiment1_dual();
  const TimeGrid grid(50);
  const StartSampler sampler(w, grid, nullptr, 5);
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(rng));
}
BENCHMARK(BM_SampleStart);

static void BM_Crossover(benchmark::State& state) {
  const TimeGrid grid(50);
  const Curve a = linear_curve({0.0, 0.0}, {1.0, 1.0}, grid);
  const Curve b = linear_curve({0.0, 1.0}, {1.0, 0.0}, grid);
  for (auto _ : state) benchmark::DoNotOptimize(crossover(a, b, 0.05, 0.5));
}
BENCHMARK(BM_Crossover);

#include <benchmark/benchmark.h>

#include "dgcg/problem.hpp"

using namespace dgcg;

namespace {

Problem experiment1_problem() {
  const TimeGrid grid(50);
  FrequencySchedule s = spiral_schedule(grid.nodes(), 20);
  SparseMeasure truth;
  truth.alpha = truth.beta = 0.1;
  const Curve line = linear_curve({0.2, 0.2}, {0.8, 0.8}, grid);
  truth.add_atom(curve_energy(line, 0.1, 0.1), line);
  Measurements data = synthesize(truth, s, grid);
  return Problem(grid, std::move(s), std::move(data), 0.1, 0.1);
}

}  // namespace

static void BM_Kernel(benchmark::State& state) {
  const FrequencySchedule s = spiral_schedule(1, static_cast<int>(state.range(0)));
  const Vec2 x{0.37, 0.64};
  for (auto _ : state) benchmark::DoNotOptimize(kernel(s, 0, x));
}
BENCHMARK(BM_Kernel)->Arg(20)->Arg(60);

static void BM_KernelGradient(benchmark::State& state) {
  const FrequencySchedule s = spiral_schedule(1, static_cast<int>(state.range(0)));
  const Vec2 x{0.37, 0.64};
  for (auto _ : state) benchmark::DoNotOptimize(kernel_grad(s, 0, x));
}
BENCHMARK(BM_KernelGradient)->Arg(20)->Arg(60);

static void BM_ApplyForward(benchmark::State& state) {
  const Problem p = experiment1_problem();
  SparseMeasure m;
  m.alpha = m.beta = 0.1;
  for (int j = 0; j < state.range(0); ++j) {
    const Curve c = linear_curve({0.2 + 0.01 * j, 0.25}, {0.7, 0.75}, p.grid);
    m.add_atom(0.1, c);
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(apply_forward(m, p.schedule, p.grid, 25));
}
BENCHMARK(BM_ApplyForward)->Arg(1)->Arg(8);

static void BM_DualValueGrad(benchmark::State& state) {
  const Problem p = experiment1_problem();
  SparseMeasure empty;
  empty.alpha = empty.beta = 0.1;
  const DualVariable w = dual_variable(empty, p);
  const Vec2 x{0.42, 0.58};
  for (auto _ : state) benchmark::DoNotOptimize(w.value_grad(25, x));
}
BENCHMARK(BM_DualValueGrad);

static void BM_Objective(benchmark::State& state) {
  const Problem p = experiment1_problem();
  SparseMeasure m;
  m.alpha = m.beta = 0.1;
  m.add_atom(0.12, linear_curve({0.21, 0.2}, {0.79, 0.81}, p.grid));
  for (auto _ : state) benchmark::DoNotOptimize(objective(m, p));
}
BENCHMARK(BM_Objective);

BENCHMARK_MAIN();

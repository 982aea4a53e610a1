#include <benchmark/benchmark.h>

#include "dgcg/rng.hpp"
#include "dgcg/weights.hpp"

using namespace dgcg;

namespace {

QuadraticProgram random_qp(int n, std::uint64_t seed) {
  Rng rng(seed);
  const int rows = n + 2;
  std::vector<std::vector<double>> m(rows, std::vector<double>(n));
  for (auto& row : m)
    for (double& v : row) v = rng.uniform(-1.0, 1.0);
  QuadraticProgram qp;
  qp.n = n;
  qp.gamma.assign(static_cast<std::size_t>(n) * n, 0.0);
  qp.b.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double sum = 0.0;
      for (int r = 0; r < rows; ++r) sum += m[r][i] * m[r][j];
      qp.at(i, j) = sum;
    }
    qp.b[i] = rng.uniform(-2.0, 2.0);
  }
  return qp;
}

Problem small_problem() {
  const TimeGrid grid(20);
  FrequencySchedule s = rotating_line_schedule(grid.nodes(), 4, 1.0, 15);
  SparseMeasure truth;
  truth.alpha = truth.beta = 0.1;
  const Curve line = linear_curve({0.3, 0.3}, {0.7, 0.6}, grid);
  truth.add_atom(curve_energy(line, 0.1, 0.1), line);
  Measurements data = synthesize(truth, s, grid);
  return Problem(grid, std::move(s), std::move(data), 0.1, 0.1);
}

}  // namespace

static void BM_SolveNnqp(benchmark::State& state) {
  const QuadraticProgram qp = random_qp(static_cast<int>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(solve_nnqp(qp));
}
BENCHMARK(BM_SolveNnqp)->Arg(8)->Arg(24)->Arg(48);

static void BM_AssembleQp(benchmark::State& state) {
  const Problem p = small_problem();
  Rng rng(7);
  std::vector<Curve> curves;
  for (int j = 0; j < state.range(0); ++j) {
    Curve c;
    for (int i = 0; i < p.grid.nodes(); ++i)
      c.nodes.push_back({rng.uniform(0.15, 0.85), rng.uniform(0.15, 0.85)});
    curves.push_back(std::move(c));
  }
  for (auto _ : state) benchmark::DoNotOptimize(assemble_qp(curves, p));
}
BENCHMARK(BM_AssembleQp)->Arg(4)->Arg(16);

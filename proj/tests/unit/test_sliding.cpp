#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "dgcg/insertion.hpp"
#include "dgcg/rng.hpp"
#include "dgcg/sliding.hpp"

using namespace dgcg;

namespace {

FrequencySchedule zero_frequency(int times) {
  FrequencySchedule s;
  s.freqs.assign(times, {Vec2{0.0, 0.0}});
  return s;
}

FrequencySchedule probe_schedule(int times) {
  FrequencySchedule s;
  s.freqs.assign(times, {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.5, -0.5}});
  return s;
}

Curve random_curve(Rng& rng, int T) {
  Curve c;
  for (int i = 0; i <= T; ++i)
    c.nodes.push_back({rng.uniform(0.15, 0.85), rng.uniform(0.15, 0.85)});
  return c;
}

}  // namespace

TEST_CASE("slide gradient closed form on a three-node grid") {
  // zero-frequency kernel and flat-region nodes: the dual variable is
  // constant there, so only the curve-energy term survives
  const TimeGrid grid(2);
  const auto s = zero_frequency(grid.nodes());
  const double alpha = 0.15, beta = 0.25;
  const double d = 0.7;  // constant real data
  Measurements f(grid.nodes(), MeasurementVector{Complex(d, 0.0)});
  const Problem p(grid, s, f, alpha, beta);

  Curve c;
  c.nodes = {{0.3, 0.4}, {0.5, 0.5}, {0.6, 0.3}};
  const double weight = 0.2;
  SparseMeasure m;
  m.alpha = alpha;
  m.beta = beta;
  m.add_atom(weight, c);

  const double a = normalization(c, alpha, beta);
  const double L = 1.0 / a;
  const double F = (weight * a - d) / L;  // W = c a - d on the flat region
  const double T = 2.0;
  const Vec2 dl0 = beta * T * (c.nodes[0] - c.nodes[1]);
  const Vec2 dl1 = beta * T * (2.0 * c.nodes[1] - c.nodes[0] - c.nodes[2]);
  const Vec2 dl2 = beta * T * (c.nodes[2] - c.nodes[1]);
  const double scale = -weight * F / L;

  const auto g = slide_gradient(m, p);
  REQUIRE(g.size() == 1);
  CHECK(norm(g[0][0] - scale * dl0) < 1e-12);
  CHECK(norm(g[0][1] - scale * dl1) < 1e-12);
  CHECK(norm(g[0][2] - scale * dl2) < 1e-12);
}

TEST_CASE("slide gradient vanishes at a noiseless ground truth") {
  const TimeGrid grid(10);
  const auto s = probe_schedule(grid.nodes());
  Rng rng(3);
  SparseMeasure truth;
  truth.alpha = truth.beta = 0.12;
  truth.add_atom(0.4, random_curve(rng, 10));
  truth.add_atom(0.7, random_curve(rng, 10));
  const Problem p(grid, s, synthesize(truth, s, grid), 0.12, 0.12);

  for (const auto& atom_grad : slide_gradient(truth, p))
    for (const Vec2& v : atom_grad) CHECK(norm(v) < 1e-13);
}

TEST_CASE("slide gradient of a static atom at the backprojection argmax") {
  const TimeGrid grid(8);
  const auto s = probe_schedule(grid.nodes());
  Curve source;
  source.nodes.assign(grid.nodes(), Vec2{0.45, 0.55});
  SparseMeasure truth;
  truth.alpha = truth.beta = 0.1;
  truth.add_atom(curve_energy(source, 0.1, 0.1), source);
  const Measurements f = synthesize(truth, s, grid);
  const Problem p(grid, s, f, 0.1, 0.1);

  // dense-grid argmax of the time-averaged backprojection, polished by ascent
  Measurements neg(f);
  for (auto& row : neg)
    for (auto& v : row) v = -v;
  const DualVariable back(s, neg);  // w = +K f
  auto averaged = [&](Vec2 x) {
    double sum = 0.0;
    for (int i = 0; i < grid.nodes(); ++i) sum += back.value(i, x);
    return sum / grid.nodes();
  };
  Vec2 argmax;
  double best = -1e300;
  const int n = 1024;
  for (int gx = 100; gx <= n - 100; gx += 2)
    for (int gy = 100; gy <= n - 100; gy += 2) {
      const Vec2 x{static_cast<double>(gx) / n, static_cast<double>(gy) / n};
      const double v = averaged(x);
      if (v > best) {
        best = v;
        argmax = x;
      }
    }
  double step = 1.0 / n;
  for (int it = 0; it < 60; ++it) {
    Vec2 g{0.0, 0.0};
    for (int i = 0; i < grid.nodes(); ++i) g += back.gradient(i, argmax);
    g *= 1.0 / grid.nodes();
    const Vec2 trial = argmax + step * g;
    if (averaged(trial) > averaged(argmax)) {
      argmax = trial;
      step *= 1.5;
    } else {
      step *= 0.5;
    }
  }

  Curve still;
  still.nodes.assign(grid.nodes(), argmax);
  SparseMeasure m;
  m.alpha = m.beta = 0.1;
  m.add_atom(0.05, still);
  const auto grad = slide_gradient(m, p);
  for (const Vec2& v : grad[0]) {
    CHECK(std::abs(v.x) < 1e-4);
    CHECK(std::abs(v.y) < 1e-4);
  }
}

TEST_CASE("slide gradient matches finite differences of the objective") {
  const TimeGrid grid(9);
  const auto s = probe_schedule(grid.nodes());
  Rng rng(41);
  for (int rep = 0; rep < 15; ++rep) {
    SparseMeasure data_truth;
    data_truth.alpha = data_truth.beta = 0.1;
    data_truth.add_atom(rng.uniform(0.3, 1.0), random_curve(rng, 9));
    const Problem p(grid, s, synthesize(data_truth, s, grid), 0.1, 0.1);

    SparseMeasure m;
    m.alpha = m.beta = 0.1;
    m.add_atom(rng.uniform(0.1, 0.6), random_curve(rng, 9));
    m.add_atom(rng.uniform(0.1, 0.6), random_curve(rng, 9));

    const auto g = slide_gradient(m, p);
    const double h = 1e-6;
    double err2 = 0.0, ref2 = 0.0;
    for (std::size_t j = 0; j < m.atoms.size(); ++j) {
      for (int node = 0; node <= 9; ++node) {
        for (int comp = 0; comp < 2; ++comp) {
          SparseMeasure plus = m, minus = m;
          double& pc = comp == 0 ? plus.atoms[j].curve.nodes[node].x
                                 : plus.atoms[j].curve.nodes[node].y;
          double& mc = comp == 0 ? minus.atoms[j].curve.nodes[node].x
                                 : minus.atoms[j].curve.nodes[node].y;
          pc += h;
          mc -= h;
          const double fd =
              (objective(plus, p).total - objective(minus, p).total) / (2 * h);
          const double an = comp == 0 ? g[j][node].x : g[j][node].y;
          err2 += (an - fd) * (an - fd);
          ref2 += an * an;
        }
      }
    }
    if (ref2 > 1e-12) CHECK(std::sqrt(err2 / ref2) < 1e-5);
  }
}

TEST_CASE("slide gradient equals the weighted insertion gradient") {
  const TimeGrid grid(11);
  const auto s = probe_schedule(grid.nodes());
  Rng rng(53);
  SparseMeasure data_truth;
  data_truth.alpha = data_truth.beta = 0.15;
  data_truth.add_atom(0.5, random_curve(rng, 11));
  const Problem p(grid, s, synthesize(data_truth, s, grid), 0.15, 0.15);

  SparseMeasure m;
  m.alpha = m.beta = 0.15;
  m.add_atom(0.33, random_curve(rng, 11));
  m.add_atom(0.21, random_curve(rng, 11));

  const DualVariable w = dual_variable(m, p);
  const auto g = slide_gradient(m, p);
  for (std::size_t j = 0; j < m.atoms.size(); ++j) {
    const auto gi = insertion_gradient(m.atoms[j].curve, w, 0.15, 0.15);
    for (int node = 0; node <= 11; ++node)
      CHECK(norm(g[j][node] - m.atoms[j].weight * gi[node]) <= 1e-10);
  }
}

TEST_CASE("slide behavior") {
  const TimeGrid grid(50);
  const FrequencySchedule s = spiral_schedule(grid.nodes(), 20);
  SparseMeasure truth;
  truth.alpha = truth.beta = 0.1;
  const Curve line = linear_curve({0.2, 0.2}, {0.8, 0.8}, grid);
  truth.add_atom(curve_energy(line, 0.1, 0.1), line);
  const Problem p(grid, s, synthesize(truth, s, grid), 0.1, 0.1);

  SUBCASE("zero inner steps leave the measure unchanged") {
    SlideConfig cfg;
    cfg.inner_steps = 0;
    const SparseMeasure out = slide(truth, p, cfg);
    CHECK(curve_distance(out.atoms[0].curve, truth.atoms[0].curve) == 0.0);
    CHECK(out.atoms[0].weight == truth.atoms[0].weight);
  }

  SUBCASE("stationary input stays put") {
    // the ground truth has zero residual, hence zero slide gradient
    SlideConfig cfg;
    const SparseMeasure out = slide(truth, p, cfg);
    CHECK(curve_distance(out.atoms[0].curve, truth.atoms[0].curve) <= 1e-9);
  }

  SUBCASE("perturbed single-atom iterate strictly decreases") {
    Rng rng(71);
    SparseMeasure m;
    m.alpha = m.beta = 0.1;
    Curve perturbed = line;
    for (Vec2& node : perturbed.nodes) {
      node.x += rng.uniform(-0.02, 0.02);
      node.y += rng.uniform(-0.02, 0.02);
    }
    m.add_atom(truth.atoms[0].weight, perturbed);
    const double before = objective(m, p).total;
    SlideConfig cfg;
    const SparseMeasure out = slide(m, p, cfg);
    const double after = objective(out, p).total;
    CHECK(after < before);
    CHECK(out.atoms[0].weight == m.atoms[0].weight);  // weights fixed
  }

  SUBCASE("colliding atoms are merged with summed weights") {
    // equal weights keep the pair moving in lockstep through the descent
    SparseMeasure m;
    m.alpha = m.beta = 0.1;
    Curve near = line;
    for (Vec2& node : near.nodes) node.x += 5e-4;
    m.add_atom(0.065, line);
    m.add_atom(0.065, near);
    SlideConfig cfg;
    cfg.inner_steps = 1;
    const SparseMeasure out = slide(m, p, cfg);
    REQUIRE(out.size() == 1);
    CHECK(out.atoms[0].weight == doctest::Approx(0.13).epsilon(1e-12));
  }
}

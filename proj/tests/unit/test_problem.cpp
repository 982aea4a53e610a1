#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "dgcg/problem.hpp"
#include "dgcg/rng.hpp"

using namespace dgcg;

namespace {

FrequencySchedule zero_frequency(int times) {
  FrequencySchedule s;
  s.freqs.assign(times, {Vec2{0.0, 0.0}});
  return s;
}

FrequencySchedule mixed_schedule(int times) {
  FrequencySchedule s;
  s.freqs.assign(times, {{0.0, 0.0}, {1.0, 0.0}, {-2.0, 1.5}, {3.0, -1.0}});
  return s;
}

SparseMeasure static_atom(const TimeGrid& grid, Vec2 x, double alpha,
                          double beta, double atom_intensity = 1.0) {
  Curve c;
  c.nodes.assign(grid.nodes(), x);
  SparseMeasure m;
  m.alpha = alpha;
  m.beta = beta;
  m.add_atom(atom_intensity * curve_energy(c, alpha, beta), c);
  return m;
}

double total_norm2(const Measurements& f) {
  double sum = 0.0;
  for (const auto& row : f) sum += h_norm2(row);
  return sum;
}

}  // namespace

TEST_CASE("synthesize closed form for the zero frequency") {
  const TimeGrid grid(50);
  const auto s = zero_frequency(grid.nodes());
  SparseMeasure truth;
  truth.alpha = truth.beta = 0.1;
  const Curve line = linear_curve({0.2, 0.2}, {0.8, 0.8}, grid);
  truth.add_atom(curve_energy(line, 0.1, 0.1), line);  // intensity 1

  const Measurements f = synthesize(truth, s, grid);
  REQUIRE(static_cast<int>(f.size()) == grid.nodes());
  for (int i = 0; i <= 50; ++i) {
    const Vec2 p = line.eval(grid.t(i));
    CHECK(f[i][0].real() ==
          doctest::Approx(cutoff(p.x) * cutoff(p.y)).epsilon(1e-13));
    CHECK(f[i][0].imag() == doctest::Approx(0.0).epsilon(1e-14));
  }

  SparseMeasure empty;
  empty.alpha = empty.beta = 0.1;
  for (const auto& row : synthesize(empty, s, grid))
    CHECK(row[0] == Complex(0.0, 0.0));

  // linearity in the weights
  SparseMeasure scaled = truth;
  scaled.atoms[0].weight *= 0.37;
  const Measurements fs = synthesize(scaled, s, grid);
  for (int i = 0; i <= 50; ++i)
    CHECK(std::abs(fs[i][0] - 0.37 * f[i][0]) < 1e-14);
}

TEST_CASE("noise scaling identity and determinism") {
  const TimeGrid grid(20);
  const auto s = mixed_schedule(grid.nodes());
  const SparseMeasure truth = static_atom(grid, {0.4, 0.6}, 0.1, 0.1);
  const Measurements f = synthesize(truth, s, grid);

  CHECK(total_norm2(add_noise(f, 0.0, 9)) == total_norm2(f));

  const Measurements noisy = add_noise(f, 0.2, 42);
  double diff2 = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    MeasurementVector d = noisy[i];
    for (std::size_t k = 0; k < d.size(); ++k) d[k] -= f[i][k];
    diff2 += h_norm2(d);
  }
  CHECK(std::sqrt(diff2 / total_norm2(f)) == doctest::Approx(0.2).epsilon(1e-12));

  const Measurements again = add_noise(f, 0.2, 42);
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t k = 0; k < f[i].size(); ++k)
      CHECK(noisy[i][k] == again[i][k]);

  const Measurements other = add_noise(f, 0.2, 43);
  bool identical = true;
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t k = 0; k < f[i].size(); ++k)
      if (noisy[i][k] != other[i][k]) identical = false;
  CHECK(!identical);

  Measurements zero(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    zero[i].assign(f[i].size(), Complex(0.0, 0.0));
  CHECK_THROWS_AS(add_noise(zero, 0.2, 1), std::invalid_argument);
}

TEST_CASE("objective parts") {
  const TimeGrid grid(30);
  const auto s = mixed_schedule(grid.nodes());
  const SparseMeasure truth = static_atom(grid, {0.35, 0.55}, 0.15, 0.2);
  const Problem p(grid, s, synthesize(truth, s, grid), 0.15, 0.2);

  SparseMeasure empty;
  empty.alpha = 0.15;
  empty.beta = 0.2;
  const ObjectiveParts at_zero = objective(empty, p);
  CHECK(at_zero.regularizer == 0.0);
  CHECK(at_zero.fidelity == doctest::Approx(p.m0()).epsilon(1e-15));

  const ObjectiveParts at_truth = objective(truth, p);
  CHECK(at_truth.fidelity == doctest::Approx(0.0).epsilon(1e-18));
  CHECK(at_truth.total == doctest::Approx(truth.regularizer()).epsilon(1e-13));
}

TEST_CASE("dual variable") {
  const TimeGrid grid(25);
  const auto s = mixed_schedule(grid.nodes());
  const SparseMeasure truth = static_atom(grid, {0.45, 0.5}, 0.1, 0.1);
  const Measurements f = synthesize(truth, s, grid);
  const Problem p(grid, s, f, 0.1, 0.1);

  // at the zero measure the dual variable is the backprojection K f
  SparseMeasure empty;
  empty.alpha = empty.beta = 0.1;
  const DualVariable w0 = dual_variable(empty, p);
  Rng rng(2);
  for (int rep = 0; rep < 40; ++rep) {
    const int i = static_cast<int>(rng.uniform() * grid.nodes());
    const Vec2 x{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
    CHECK(w0.value(i, x) ==
          doctest::Approx(apply_preadjoint(s, i, f[i], x)).epsilon(1e-14));
  }

  // at the ground truth the residual vanishes identically
  const DualVariable wt = dual_variable(truth, p);
  for (int rep = 0; rep < 40; ++rep) {
    const int i = static_cast<int>(rng.uniform() * grid.nodes());
    const Vec2 x{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
    CHECK(std::abs(wt.value(i, x)) < 1e-13);
  }

  // gradient against central differences, flat region
  for (int rep = 0; rep < 60; ++rep) {
    const int i = static_cast<int>(rng.uniform() * grid.nodes());
    const Vec2 x{rng.uniform(0.12, 0.88), rng.uniform(0.12, 0.88)};
    const Vec2 g = w0.gradient(i, x);
    const double h = 1e-5;
    const Vec2 fd{(w0.value(i, {x.x + h, x.y}) - w0.value(i, {x.x - h, x.y})) / (2 * h),
                  (w0.value(i, {x.x, x.y + h}) - w0.value(i, {x.x, x.y - h})) / (2 * h)};
    CHECK(norm(g - fd) / std::max(norm(g), 1e-9) < 1e-6);
  }

  // outside the closed unit square w vanishes
  CHECK(w0.value(3, {1.4, 0.5}) == 0.0);
  CHECK(norm(w0.gradient(3, {-0.2, 0.7})) == 0.0);
}

TEST_CASE("pairing") {
  const TimeGrid grid(40);
  const auto s = zero_frequency(grid.nodes());

  // zero residual -> zero pairing
  Measurements zero(grid.nodes(), MeasurementVector{Complex(0.0, 0.0)});
  const DualVariable w_zero(s, zero);
  const Curve line = linear_curve({0.3, 0.3}, {0.7, 0.6}, grid);
  CHECK(pairing(line, w_zero, 0.1, 0.1) == 0.0);

  // residual -kappa at the zero frequency gives w = kappa on the flat region
  const double kappa = 0.8;
  Measurements res(grid.nodes(), MeasurementVector{Complex(-kappa, 0.0)});
  const DualVariable w_const(s, res);
  CHECK(pairing(line, w_const, 0.1, 0.1) ==
        doctest::Approx(normalization(line, 0.1, 0.1) * kappa).epsilon(1e-13));
}

TEST_CASE("pairing is affine in the measure weights") {
  const TimeGrid grid(15);
  const auto s = mixed_schedule(grid.nodes());
  Rng rng(77);
  const SparseMeasure truth = static_atom(grid, {0.5, 0.4}, 0.1, 0.1);
  const Problem p(grid, s, synthesize(truth, s, grid), 0.1, 0.1);

  Curve probe;
  for (int i = 0; i < grid.nodes(); ++i)
    probe.nodes.push_back({rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8)});

  Curve c1, c2;
  for (int i = 0; i < grid.nodes(); ++i) {
    c1.nodes.push_back({rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8)});
    c2.nodes.push_back({rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8)});
  }
  auto measure_with = [&](double wa, double wb) {
    SparseMeasure m;
    m.alpha = m.beta = 0.1;
    m.add_atom(wa, c1);
    m.add_atom(wb, c2);
    return m;
  };
  const double pa = pairing(probe, dual_variable(measure_with(0.3, 0.9), p), 0.1, 0.1);
  const double pb = pairing(probe, dual_variable(measure_with(0.7, 0.1), p), 0.1, 0.1);
  const double pm = pairing(probe, dual_variable(measure_with(0.5, 0.5), p), 0.1, 0.1);
  CHECK(pm == doctest::Approx(0.5 * (pa + pb)).epsilon(1e-12));
}

TEST_CASE("lambda gap") {
  CHECK(lambda_gap(1.0, 3.7) == 0.0);
  CHECK(lambda_gap(0.3, 2.0) == 0.0);
  CHECK(lambda_gap(-5.0, 2.0) == 0.0);
  CHECK(lambda_gap(2.0, 1.0) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("positivity test") {
  const TimeGrid grid(12);
  const auto s = mixed_schedule(grid.nodes());
  const SparseMeasure truth = static_atom(grid, {0.5, 0.5}, 0.1, 0.1);
  const Measurements f = synthesize(truth, s, grid);

  Measurements zero(grid.nodes());
  for (int i = 0; i < grid.nodes(); ++i)
    zero[i].assign(s.count(i), Complex(0.0, 0.0));
  CHECK(positivity_test(DualVariable(s, zero)) == 0.0);

  // backprojection of data from a positive source is positive somewhere
  Measurements neg_res(f);
  for (auto& row : neg_res)
    for (auto& v : row) v = -v;  // residual -f => w = backprojection
  CHECK(positivity_test(DualVariable(s, neg_res)) > 0.0);

  // sign flip with the zero-frequency kernel, which keeps w single-signed:
  // w = -chi*chi*kappa <= 0 everywhere
  const auto s0 = zero_frequency(grid.nodes());
  Measurements pos_res(grid.nodes(), MeasurementVector{Complex(0.7, 0.0)});
  CHECK(positivity_test(DualVariable(s0, pos_res)) <= 0.0);
  Measurements flip(grid.nodes(), MeasurementVector{Complex(-0.7, 0.0)});
  CHECK(positivity_test(DualVariable(s0, flip)) > 0.0);

  CHECK_THROWS_AS(positivity_test(DualVariable(s, zero), 1), std::invalid_argument);
}

TEST_CASE("backprojection raster") {
  const TimeGrid grid(10);
  const auto s = mixed_schedule(grid.nodes());
  const Vec2 source{0.35, 0.65};
  const SparseMeasure truth = static_atom(grid, source, 0.1, 0.1);
  const Measurements f = synthesize(truth, s, grid);

  Measurements zero(grid.nodes());
  for (int i = 0; i < grid.nodes(); ++i)
    zero[i].assign(s.count(i), Complex(0.0, 0.0));
  const RasterImage flat = backprojection_raster(zero, s, 0, 32);
  for (unsigned char px : flat.pixels) CHECK(px == flat.pixels[0]);

  const int res = 64;
  const RasterImage img = backprojection_raster(f, s, 4, res);
  REQUIRE(img.resolution == res);
  REQUIRE(img.pixels.size() == static_cast<std::size_t>(res) * res);
  std::size_t argmax = 0;
  for (std::size_t k = 0; k < img.pixels.size(); ++k)
    if (img.pixels[k] > img.pixels[argmax]) argmax = k;
  const int row = static_cast<int>(argmax) / res;
  const int col = static_cast<int>(argmax) % res;
  const double px = (col + 0.5) / res;
  const double py = 1.0 - (row + 0.5) / res;
  CHECK(std::abs(px - source.x) <= 1.5 / res);
  CHECK(std::abs(py - source.y) <= 1.5 / res);

  const RasterImage again = backprojection_raster(f, s, 4, res);
  CHECK(again.pixels == img.pixels);

  const std::string path = "/tmp/dgcg_test_raster.pgm";
  write_pgm(img, path);
  std::ifstream in(path, std::ios::binary);
  std::string header;
  in >> header;
  int w, h, maxval;
  in >> w >> h >> maxval;
  CHECK(header == "P5");
  CHECK(w == res);
  CHECK(h == res);
  CHECK(maxval == 255);
  in.get();
  std::vector<unsigned char> bytes(img.pixels.size());
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  CHECK(in.gcount() == static_cast<std::streamsize>(bytes.size()));
  CHECK(bytes == img.pixels);
  std::filesystem::remove(path);
}

TEST_CASE("problem validation") {
  const TimeGrid grid(5);
  const auto s = zero_frequency(grid.nodes());
  Measurements f(grid.nodes(), MeasurementVector{Complex(1.0, 0.0)});
  CHECK_THROWS_AS(Problem(grid, s, f, 0.0, 0.1), std::invalid_argument);
  Measurements bad = f;
  bad.pop_back();
  CHECK_THROWS_AS(Problem(grid, s, bad, 0.1, 0.1), std::invalid_argument);
  Measurements wide = f;
  wide[2].push_back(Complex(0.0, 0.0));
  CHECK_THROWS_AS(Problem(grid, s, wide, 0.1, 0.1), std::invalid_argument);
}

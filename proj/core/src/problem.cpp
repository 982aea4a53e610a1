#include "dgcg/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "dgcg/parallel.hpp"
#include "dgcg/rng.hpp"

namespace dgcg {

namespace {

double total_h_norm2(const Measurements& data) {
  double sum = 0.0;
  for (const auto& row : data) sum += h_norm2(row);
  return sum;
}

bool all_zero(const Measurements& data) {
  for (const auto& row : data)
    for (const Complex& v : row)
      if (v != Complex(0.0, 0.0)) return false;
  return true;
}

}  // namespace

Problem::Problem(TimeGrid grid_, FrequencySchedule schedule_, Measurements data_,
                 double alpha_, double beta_)
    : grid(grid_),
      schedule(std::move(schedule_)),
      data(std::move(data_)),
      alpha(alpha_),
      beta(beta_) {
  if (alpha <= 0.0 || beta <= 0.0)
    throw std::invalid_argument("Problem: alpha and beta must be positive");
  if (schedule.times() != grid.nodes())
    throw std::invalid_argument("Problem: schedule length does not match grid");
  if (static_cast<int>(data.size()) != grid.nodes())
    throw std::invalid_argument("Problem: data length does not match grid");
  for (int i = 0; i < grid.nodes(); ++i) {
    if (schedule.count(i) < 1)
      throw std::invalid_argument("Problem: schedule time with no frequencies");
    if (static_cast<int>(data[i].size()) != schedule.count(i))
      throw std::invalid_argument("Problem: data length does not match schedule");
  }
}

double Problem::m0() const {
  return total_h_norm2(data) / (2.0 * grid.nodes());
}

Measurements synthesize(const SparseMeasure& truth,
                        const FrequencySchedule& schedule,
                        const TimeGrid& grid) {
  if (schedule.times() != grid.nodes())
    throw std::invalid_argument("synthesize: schedule length does not match grid");
  Measurements data(grid.nodes());
  for (int i = 0; i < grid.nodes(); ++i)
    data[i] = apply_forward(truth, schedule, grid, i);
  return data;
}

Measurements add_noise(const Measurements& data, double level,
                       std::uint64_t seed) {
  if (level < 0.0) throw std::invalid_argument("add_noise: negative noise level");
  if (level == 0.0) return data;
  if (all_zero(data))
    throw std::invalid_argument("add_noise: zero data, noise scaling undefined");

  Rng rng(seed);
  Measurements noise(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    noise[i].resize(data[i].size());
    for (auto& v : noise[i]) {
      const double u = rng.normal();
      v = Complex(u, rng.normal());
    }
  }
  const double scale =
      level * std::sqrt(total_h_norm2(data) / total_h_norm2(noise));
  Measurements out = data;
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t k = 0; k < out[i].size(); ++k)
      out[i][k] += scale * noise[i][k];
  return out;
}

ObjectiveParts objective(const SparseMeasure& measure, const Problem& problem) {
  ObjectiveParts parts;
  double sum = 0.0;
  for (int i = 0; i < problem.grid.nodes(); ++i) {
    MeasurementVector r =
        apply_forward(measure, problem.schedule, problem.grid, i);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] -= problem.data[i][k];
    sum += h_norm2(r);
  }
  parts.fidelity = sum / (2.0 * problem.grid.nodes());
  parts.regularizer = measure.regularizer();
  parts.total = parts.fidelity + parts.regularizer;
  return parts;
}

DualVariable::DualVariable(FrequencySchedule schedule, Measurements residual)
    : schedule_(std::move(schedule)), residual_(std::move(residual)) {
  if (static_cast<int>(residual_.size()) != schedule_.times())
    throw std::invalid_argument("DualVariable: residual length does not match schedule");
  for (int i = 0; i < schedule_.times(); ++i)
    if (static_cast<int>(residual_[i].size()) != schedule_.count(i))
      throw std::invalid_argument("DualVariable: residual width does not match schedule");
}

double DualVariable::value(int i, Vec2 x) const {
  return -apply_preadjoint(schedule_, i, residual_[i], x);
}

Vec2 DualVariable::gradient(int i, Vec2 x) const {
  const ScalarGradient g = apply_preadjoint_grad(schedule_, i, residual_[i], x);
  return {-g.grad.x, -g.grad.y};
}

ScalarGradient DualVariable::value_grad(int i, Vec2 x) const {
  ScalarGradient g = apply_preadjoint_grad(schedule_, i, residual_[i], x);
  g.value = -g.value;
  g.grad = {-g.grad.x, -g.grad.y};
  return g;
}

DualVariable dual_variable(const SparseMeasure& measure, const Problem& problem) {
  Measurements residual(problem.grid.nodes());
  for (int i = 0; i < problem.grid.nodes(); ++i) {
    residual[i] = apply_forward(measure, problem.schedule, problem.grid, i);
    for (std::size_t k = 0; k < residual[i].size(); ++k)
      residual[i][k] -= problem.data[i][k];
  }
  return DualVariable(problem.schedule, std::move(residual));
}

double pairing(const Curve& curve, const DualVariable& w, double alpha,
               double beta) {
  if (curve.intervals() + 1 != w.times())
    throw std::invalid_argument("pairing: curve does not match dual variable grid");
  const int T = curve.intervals();
  double sum = 0.0;
  for (int i = 0; i <= T; ++i) sum += w.value(i, curve.nodes[i]);
  return normalization(curve, alpha, beta) * sum / (T + 1);
}

double lambda_gap(double pairing_value, double m0) {
  if (pairing_value <= 1.0) return 0.0;
  return 0.5 * m0 * (pairing_value * pairing_value - 1.0);
}

namespace {

// Coarse grid argmax of w_i over the unit square followed by a few projected
// ascent steps; w is C^{1,1} with moderate frequencies, so this suffices.
double per_time_max(const DualVariable& w, int i, int resolution) {
  Vec2 best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < resolution; ++r) {
    for (int c = 0; c < resolution; ++c) {
      const Vec2 x{(c + 0.5) / resolution, (r + 0.5) / resolution};
      const double v = w.value(i, x);
      if (v > best_value) {
        best_value = v;
        best = x;
      }
    }
  }
  Vec2 x = best;
  double value = best_value;
  double step = 1.0 / resolution;
  for (int it = 0; it < 20; ++it) {
    const Vec2 g = w.gradient(i, x);
    Vec2 trial{std::clamp(x.x + step * g.x, 0.0, 1.0),
               std::clamp(x.y + step * g.y, 0.0, 1.0)};
    const double tv = w.value(i, trial);
    if (tv > value) {
      x = trial;
      value = tv;
      step *= 1.5;
    } else {
      step *= 0.5;
    }
  }
  return value;
}

}  // namespace

double positivity_test(const DualVariable& w, int grid_resolution) {
  if (grid_resolution < 2)
    throw std::invalid_argument("positivity_test: resolution must be at least 2");
  const int times = w.times();
  std::vector<double> maxima(times);
  parallel_for(times, [&](std::size_t i) {
    maxima[i] = per_time_max(w, static_cast<int>(i), grid_resolution);
  });
  double sum = 0.0;
  for (double m : maxima) sum += m;
  return sum / times;
}

RasterImage backprojection_raster(const Measurements& data,
                                  const FrequencySchedule& schedule, int i,
                                  int resolution) {
  if (resolution < 1) throw std::invalid_argument("raster resolution must be positive");
  std::vector<double> field(static_cast<std::size_t>(resolution) * resolution);
  parallel_for(resolution, [&](std::size_t r) {
    const double y = 1.0 - (r + 0.5) / resolution;
    for (int c = 0; c < resolution; ++c) {
      const Vec2 x{(c + 0.5) / resolution, y};
      field[r * resolution + c] = apply_preadjoint(schedule, i, data.at(i), x);
    }
  });
  const auto [lo_it, hi_it] = std::minmax_element(field.begin(), field.end());
  const double lo = *lo_it, hi = *hi_it;
  RasterImage img;
  img.resolution = resolution;
  img.pixels.resize(field.size(), 0);
  if (hi > lo) {
    for (std::size_t k = 0; k < field.size(); ++k)
      img.pixels[k] = static_cast<unsigned char>(
          std::lround(255.0 * (field[k] - lo) / (hi - lo)));
  }
  return img;
}

void write_pgm(const RasterImage& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "P5\n" << image.resolution << " " << image.resolution << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace dgcg

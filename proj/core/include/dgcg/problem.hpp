#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dgcg/forward.hpp"
#include "dgcg/geometry.hpp"

namespace dgcg {

// The time-discrete variational problem: data, schedule and regularization
// parameters on a common grid.
struct Problem {
  TimeGrid grid;
  FrequencySchedule schedule;
  Measurements data;
  double alpha = 0.0;
  double beta = 0.0;

  Problem(TimeGrid grid_, FrequencySchedule schedule_, Measurements data_,
          double alpha_, double beta_);

  // Objective value of the zero measure: 1/(2(T+1)) sum_i |f_i|^2.
  double m0() const;
};

// Noiseless data of a ground truth: f_i = apply_forward(truth, i).
Measurements synthesize(const SparseMeasure& truth,
                        const FrequencySchedule& schedule,
                        const TimeGrid& grid);

// f + level * sqrt(sum|f|^2 / sum|nu|^2) * nu with complex standard Gaussian
// nu; the aggregate relative perturbation equals level exactly.
Measurements add_noise(const Measurements& data, double level,
                       std::uint64_t seed);

struct ObjectiveParts {
  double fidelity = 0.0;
  double regularizer = 0.0;
  double total = 0.0;
};

ObjectiveParts objective(const SparseMeasure& measure, const Problem& problem);

// Residual-backed dual variable w_i(x) = -(K_i (K*_i rho_i - f_i))(x),
// evaluable with spatial gradient anywhere; zero outside the unit square.
class DualVariable {
 public:
  DualVariable(FrequencySchedule schedule, Measurements residual);

  int times() const { return schedule_.times(); }
  const FrequencySchedule& schedule() const { return schedule_; }
  const Measurements& residual() const { return residual_; }

  double value(int i, Vec2 x) const;
  Vec2 gradient(int i, Vec2 x) const;
  ScalarGradient value_grad(int i, Vec2 x) const;

 private:
  FrequencySchedule schedule_;
  Measurements residual_;
};

DualVariable dual_variable(const SparseMeasure& measure, const Problem& problem);

// <rho_curve, w>_D = a_curve / (T+1) * sum_i w_i(curve(t_i)).
double pairing(const Curve& curve, const DualVariable& w, double alpha,
               double beta);

// Lambda(t) = 0 for t <= 1, (m0/2)(t^2 - 1) for t > 1; the primal-dual gap of
// an iterate is Lambda applied to the best insertion pairing.
double lambda_gap(double pairing_value, double m0);

// P(w) = 1/(T+1) sum_i max_x w_i(x), each maximum located on a coarse grid
// and refined by projected gradient ascent. P <= 0 certifies that the zero
// measure is optimal.
double positivity_test(const DualVariable& w, int grid_resolution = 64);

struct RasterImage {
  int resolution = 0;
  std::vector<unsigned char> pixels;  // row-major, top row = y near 1
};

// Samples the backprojection (K_i f_i)(x) on a resolution^2 grid over the
// unit square, min-max normalized to 0..255.
RasterImage backprojection_raster(const Measurements& data,
                                  const FrequencySchedule& schedule, int i,
                                  int resolution);

// Binary 8-bit PGM (P5).
void write_pgm(const RasterImage& image, const std::string& path);

}  // namespace dgcg

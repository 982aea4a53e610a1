#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dgcg/problem.hpp"
#include "dgcg/rng.hpp"

namespace dgcg {

struct DescentConfig {
  int max_iterations = 3000;
  double armijo_shrink = 0.5;   // step multiplier on rejection
  double armijo_slope = 1e-4;   // sufficient-decrease fraction
  double initial_step = 1.0;
  // Stationarity is declared at node-gradient norm below
  // stationarity_tol * max(1, |F|); the relative scaling keeps the target
  // above the floating-point resolution of the Armijo decrease.
  double stationarity_tol = 1e-6;
  int max_backtracks = 40;
  // Optional (I - Laplacian)^{-1} smoothing of the descent direction.
  bool h1_preconditioner = false;
};

struct MultistartConfig {
  int max_restarts = 20;  // restarts beyond the seeded atom descents
  double crossover_epsilon = 0.05;
  double crossover_delta = 0.5;
  double dedup_tol = 1e-3;  // max-node-distance for set membership
  std::uint64_t seed = 0;
  int sample_stride = 5;  // grid nodes between sampler anchor times
  // Non-negative nondecreasing reweighting for the start sampler;
  // defaults to max(t,0)^2.
  std::function<double(double)> reweight;
  // When non-empty, stationary curves are dumped there as CSV with F values.
  std::string debug_dump_path;
};

// F(curve) = W/L with W = -1/(T+1) sum_i w_i(curve(t_i)); equals
// -pairing(curve, w).
double insertion_value(const Curve& curve, const DualVariable& w, double alpha,
                       double beta);

// Nodewise derivative of F: (dW - F dL)/L.
std::vector<Vec2> insertion_gradient(const Curve& curve, const DualVariable& w,
                                     double alpha, double beta);

struct DescentResult {
  // nullopt encodes the point at infinity (start had F >= 0).
  std::optional<Curve> curve;
  bool stationary = false;
  double value = 0.0;      // F at the output curve
  double grad_norm = 0.0;  // node gradient norm at the output curve
  int iterations = 0;
};

// Backtracking-Armijo descent of F on node coordinates, clamped to the unit
// square. Returns the infinity curve iff F(start) >= 0.
DescentResult descend(const Curve& start, const DualVariable& w, double alpha,
                      double beta, const DescentConfig& config);

// Random starts: node positions at anchor times are drawn by rejection
// sampling from a density proportional to reweight(w_t(x)) on
// [0.05,0.95]^2, then linearly interpolated to the full grid.
class StartSampler {
 public:
  StartSampler(const DualVariable& w, const TimeGrid& grid,
               std::function<double(double)> reweight, int stride);

  Curve sample(Rng& rng) const;

 private:
  const DualVariable* w_;
  TimeGrid grid_;
  std::function<double(double)> reweight_;
  std::vector<int> anchors_;
  std::vector<double> envelopes_;  // per anchor; <= 0 means uniform fallback
};

Curve sample_start(const DualVariable& w, const TimeGrid& grid,
                   const std::function<double(double)>& reweight,
                   std::uint64_t seed);

// Recombination of two curves on each maximal interval where they stay
// epsilon-close: both swap orders, bridged linearly over the central delta
// fraction of the interval. Near-identical curves produce nothing.
std::vector<Curve> crossover(const Curve& a, const Curve& b, double epsilon,
                             double delta);

// Multistart gradient descent for the insertion step. Seeded atoms are always
// descended; max_restarts further starts are taken from the crossover queue
// or sampled. Returns distinct stationary curves sorted by F ascending, or an
// empty set when there are no seeds and the positivity test fails.
std::vector<Curve> multistart(const std::vector<Curve>& known_atoms,
                              const DualVariable& w, const TimeGrid& grid,
                              double alpha, double beta,
                              const MultistartConfig& mconfig,
                              const DescentConfig& dconfig);

}  // namespace dgcg

#pragma once

#include <vector>

#include "dgcg/problem.hpp"

namespace dgcg {

struct SlideConfig {
  int inner_steps = 100;
  double initial_step = 1.0;
  double armijo_shrink = 0.5;
  double armijo_slope = 1e-4;
  int max_backtracks = 40;
  double stationarity_tol = 1e-6;
  // Atoms whose curves stay this close at every node are merged.
  double merge_tol = 1e-3;
};

// Gradient of the fixed-weight objective over all atom node positions:
// per atom, weight_j times the insertion gradient taken against the
// aggregate dual variable of the measure.
std::vector<std::vector<Vec2>> slide_gradient(const SparseMeasure& measure,
                                              const Problem& problem);

// Joint Armijo descent of the objective over every atom's nodes with weights
// fixed; node positions stay clamped to the unit square and the objective
// never increases. Colliding atoms are merged with summed weights.
SparseMeasure slide(const SparseMeasure& measure, const Problem& problem,
                    const SlideConfig& config);

}  // namespace dgcg

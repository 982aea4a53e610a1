#include "dgcg/sliding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dgcg/insertion.hpp"

namespace dgcg {

namespace {

Vec2 clamp_unit(Vec2 p) {
  return {std::clamp(p.x, 0.0, 1.0), std::clamp(p.y, 0.0, 1.0)};
}

double stacked_norm(const std::vector<std::vector<Vec2>>& g) {
  double sum = 0.0;
  for (const auto& atom : g)
    for (const Vec2& v : atom) sum += norm2(v);
  return std::sqrt(sum);
}

SparseMeasure merge_colliding(SparseMeasure measure, double merge_tol) {
  for (std::size_t j = 0; j < measure.atoms.size(); ++j) {
    for (std::size_t k = j + 1; k < measure.atoms.size();) {
      if (curve_distance(measure.atoms[j].curve, measure.atoms[k].curve) <
          merge_tol) {
        measure.atoms[j].weight += measure.atoms[k].weight;
        measure.atoms.erase(measure.atoms.begin() + k);
      } else {
        ++k;
      }
    }
  }
  return measure;
}

}  // namespace

std::vector<std::vector<Vec2>> slide_gradient(const SparseMeasure& measure,
                                              const Problem& problem) {
  const DualVariable w = dual_variable(measure, problem);
  std::vector<std::vector<Vec2>> grad(measure.atoms.size());
  for (std::size_t j = 0; j < measure.atoms.size(); ++j) {
    grad[j] = insertion_gradient(measure.atoms[j].curve, w, problem.alpha,
                                 problem.beta);
    for (Vec2& v : grad[j]) v *= measure.atoms[j].weight;
  }
  return grad;
}

SparseMeasure slide(const SparseMeasure& measure, const Problem& problem,
                    const SlideConfig& config) {
  if (measure.atoms.empty() || config.inner_steps == 0) return measure;

  SparseMeasure current = measure;
  const double initial_objective = objective(measure, problem).total;
  double value = initial_objective;

  // Armijo backtracking with a spectral (Barzilai-Borwein) initial step on
  // the stacked node coordinates, weights held fixed.
  std::vector<std::vector<Vec2>> prev_nodes, prev_grad;
  double tau = config.initial_step;
  for (int it = 0; it < config.inner_steps; ++it) {
    // dual variable refreshed every step: this is the true gradient of the
    // fixed-weight objective at the current curves
    const auto grad = slide_gradient(current, problem);
    const double gn = stacked_norm(grad);
    if (!std::isfinite(gn))
      throw std::runtime_error("slide: non-finite gradient");
    if (gn < config.stationarity_tol * std::max(1.0, std::abs(value))) break;

    if (!prev_nodes.empty()) {
      double ss = 0.0, sy = 0.0;
      for (std::size_t j = 0; j < current.atoms.size(); ++j) {
        for (std::size_t m = 0; m < current.atoms[j].curve.nodes.size(); ++m) {
          const Vec2 s = current.atoms[j].curve.nodes[m] - prev_nodes[j][m];
          const Vec2 y = grad[j][m] - prev_grad[j][m];
          ss += norm2(s);
          sy += dot(s, y);
        }
      }
      tau = sy > 1e-300 ? std::clamp(ss / sy, 1e-10, 1e4) : config.initial_step;
    }

    bool accepted = false;
    double s = tau;
    SparseMeasure trial = current;
    for (int bt = 0; bt < config.max_backtracks; ++bt) {
      double predicted = 0.0;
      for (std::size_t j = 0; j < current.atoms.size(); ++j) {
        for (std::size_t m = 0; m < current.atoms[j].curve.nodes.size(); ++m) {
          const Vec2 moved =
              clamp_unit(current.atoms[j].curve.nodes[m] - s * grad[j][m]);
          trial.atoms[j].curve.nodes[m] = moved;
          predicted += dot(grad[j][m], current.atoms[j].curve.nodes[m] - moved);
        }
      }
      if (predicted > 0.0) {
        const double trial_value = objective(trial, problem).total;
        if (!std::isfinite(trial_value))
          throw std::runtime_error("slide: non-finite objective");
        if (trial_value <= value - config.armijo_slope * predicted) {
          accepted = true;
          value = trial_value;
          break;
        }
      }
      s *= config.armijo_shrink;
    }
    if (!accepted) break;
    prev_nodes.clear();
    prev_grad.clear();
    for (std::size_t j = 0; j < current.atoms.size(); ++j) {
      prev_nodes.push_back(current.atoms[j].curve.nodes);
      prev_grad.push_back(grad[j]);
    }
    current = trial;
  }

  if (value > initial_objective + 1e-10)
    throw std::logic_error("slide: objective increased");
  return merge_colliding(std::move(current), config.merge_tol);
}

}  // namespace dgcg

#include "dgcg/insertion.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace dgcg {

namespace {

// Sampler domain: closed convex E strictly inside the domain, containing all
// cutoff mass.
constexpr double sampler_lo = 0.05;
constexpr double sampler_hi = 0.95;
constexpr int envelope_grid = 64;
constexpr long max_rejections = 100000;

double default_reweight(double t) {
  const double p = std::max(t, 0.0);
  return p * p;
}

Vec2 clamp_unit(Vec2 p) {
  return {std::clamp(p.x, 0.0, 1.0), std::clamp(p.y, 0.0, 1.0)};
}

struct FParts {
  double w_sum = 0.0;   // sum_i w_i(curve(t_i))
  double kinetic = 0.0;  // T sum |delta|^2
  double value = 0.0;    // F = W/L
};

FParts f_parts(const Curve& curve, const DualVariable& w, double alpha,
               double beta) {
  const int T = curve.intervals();
  FParts parts;
  for (int i = 0; i <= T; ++i) parts.w_sum += w.value(i, curve.nodes[i]);
  for (int i = 0; i < T; ++i)
    parts.kinetic += norm2(curve.nodes[i + 1] - curve.nodes[i]);
  parts.kinetic *= T;
  const double W = -parts.w_sum / (T + 1);
  const double L = 0.5 * beta * parts.kinetic + alpha;
  parts.value = W / L;
  return parts;
}

double grad_norm(const std::vector<Vec2>& g) {
  double sum = 0.0;
  for (const Vec2& v : g) sum += norm2(v);
  return std::sqrt(sum);
}

// Solves the tridiagonal system (I - Laplacian) p = g per component, with the
// second-difference Laplacian scaled by T^2 and natural ends.
std::vector<Vec2> h1_smooth(const std::vector<Vec2>& g) {
  const int n = static_cast<int>(g.size());
  if (n == 1) return g;
  const double T = n - 1.0;
  const double k = T * T;
  std::vector<double> diag(n, 1.0 + 2.0 * k), off(n, -k);
  diag.front() = diag.back() = 1.0 + k;
  // Thomas algorithm, run once for x and once for y
  std::vector<Vec2> p(n);
  std::vector<double> cp(n), dx(n), dy(n);
  cp[0] = off[0] / diag[0];
  dx[0] = g[0].x / diag[0];
  dy[0] = g[0].y / diag[0];
  for (int i = 1; i < n; ++i) {
    const double m = diag[i] - off[i] * cp[i - 1];
    cp[i] = off[i] / m;
    dx[i] = (g[i].x - off[i] * dx[i - 1]) / m;
    dy[i] = (g[i].y - off[i] * dy[i - 1]) / m;
  }
  p[n - 1] = {dx[n - 1], dy[n - 1]};
  for (int i = n - 2; i >= 0; --i)
    p[i] = {dx[i] - cp[i] * p[i + 1].x, dy[i] - cp[i] * p[i + 1].y};
  return p;
}

void check_grid(const Curve& curve, const DualVariable& w) {
  if (curve.intervals() + 1 != w.times())
    throw std::invalid_argument("curve node count does not match dual variable");
}

}  // namespace

double insertion_value(const Curve& curve, const DualVariable& w, double alpha,
                       double beta) {
  check_grid(curve, w);
  return f_parts(curve, w, alpha, beta).value;
}

std::vector<Vec2> insertion_gradient(const Curve& curve, const DualVariable& w,
                                     double alpha, double beta) {
  check_grid(curve, w);
  const int T = curve.intervals();
  double w_sum = 0.0, kinetic = 0.0;
  std::vector<Vec2> grad_w(T + 1);
  for (int i = 0; i <= T; ++i) {
    const ScalarGradient vg = w.value_grad(i, curve.nodes[i]);
    w_sum += vg.value;
    grad_w[i] = (-1.0 / (T + 1)) * vg.grad;
  }
  for (int i = 0; i < T; ++i)
    kinetic += norm2(curve.nodes[i + 1] - curve.nodes[i]);
  kinetic *= T;
  const double L = 0.5 * beta * kinetic + alpha;
  const double F = (-w_sum / (T + 1)) / L;

  std::vector<Vec2> g(T + 1);
  for (int i = 0; i <= T; ++i) {
    Vec2 grad_l;
    if (T == 0) {
      grad_l = {0.0, 0.0};
    } else if (i == 0) {
      grad_l = beta * T * (curve.nodes[0] - curve.nodes[1]);
    } else if (i == T) {
      grad_l = beta * T * (curve.nodes[T] - curve.nodes[T - 1]);
    } else {
      grad_l = beta * T *
               (2.0 * curve.nodes[i] - curve.nodes[i - 1] - curve.nodes[i + 1]);
    }
    g[i] = (1.0 / L) * (grad_w[i] - F * grad_l);
  }
  return g;
}

DescentResult descend(const Curve& start, const DualVariable& w, double alpha,
                      double beta, const DescentConfig& config) {
  check_grid(start, w);
  Curve x = start;
  for (Vec2& p : x.nodes) p = clamp_unit(p);

  double F = insertion_value(x, w, alpha, beta);
  if (!std::isfinite(F)) throw std::runtime_error("descend: non-finite start value");
  DescentResult result;
  if (F >= 0.0) return result;  // infinity curve

  // Armijo backtracking with a spectral (Barzilai-Borwein) initial step.
  // Stationarity is certified on the gradient norm relative to max(1, |F|):
  // the Armijo decrease c1 s |g|^2 drops below the floating-point resolution
  // of F once |g| is of order sqrt(eps |F|), so an absolute tolerance is not
  // attainable for large |F|.
  std::vector<Vec2> g = insertion_gradient(x, w, alpha, beta);
  const std::size_t nn = x.nodes.size();
  std::vector<Vec2> prev_nodes, prev_grad;
  double tau = config.initial_step;
  int it = 0;
  for (; it < config.max_iterations; ++it) {
    const double gn = grad_norm(g);
    if (!std::isfinite(gn)) throw std::runtime_error("descend: non-finite gradient");
    const double scale = std::max(1.0, std::abs(F));
    if (gn < config.stationarity_tol * scale) {
      result.curve = x;
      result.stationary = true;
      result.value = F;
      result.grad_norm = gn;
      result.iterations = it;
      return result;
    }
    if (!prev_nodes.empty()) {
      double ss = 0.0, sy = 0.0;
      for (std::size_t m = 0; m < nn; ++m) {
        const Vec2 s = x.nodes[m] - prev_nodes[m];
        const Vec2 y = g[m] - prev_grad[m];
        ss += norm2(s);
        sy += dot(s, y);
      }
      tau = sy > 1e-300 ? std::clamp(ss / sy, 1e-10, 1e4) : config.initial_step;
    }
    const std::vector<Vec2> dir = config.h1_preconditioner ? h1_smooth(g) : g;

    bool accepted = false;
    double s = tau;
    Curve trial = x;
    double F_trial = F;
    for (int bt = 0; bt < config.max_backtracks; ++bt) {
      for (std::size_t m = 0; m < nn; ++m)
        trial.nodes[m] = clamp_unit(x.nodes[m] - s * dir[m]);
      // projected Armijo: sufficient decrease against the realized step
      double predicted = 0.0;
      for (std::size_t m = 0; m < nn; ++m)
        predicted += dot(g[m], x.nodes[m] - trial.nodes[m]);
      if (predicted > 0.0) {
        F_trial = insertion_value(trial, w, alpha, beta);
        if (!std::isfinite(F_trial))
          throw std::runtime_error("descend: non-finite trial value");
        if (F_trial <= F - config.armijo_slope * predicted) {
          accepted = true;
          break;
        }
      }
      s *= config.armijo_shrink;
    }
    if (!accepted) break;  // line search stalled, report best found
    prev_nodes = x.nodes;
    prev_grad = g;
    x = trial;
    F = F_trial;
    g = insertion_gradient(x, w, alpha, beta);
  }
  result.curve = x;
  result.stationary = false;
  result.value = F;
  result.grad_norm = grad_norm(g);
  result.iterations = it;
  return result;
}

StartSampler::StartSampler(const DualVariable& w, const TimeGrid& grid,
                           std::function<double(double)> reweight, int stride)
    : w_(&w), grid_(grid), reweight_(std::move(reweight)) {
  if (grid.nodes() != w.times())
    throw std::invalid_argument("StartSampler: grid does not match dual variable");
  if (stride < 1) throw std::invalid_argument("StartSampler: stride must be positive");
  if (!reweight_) reweight_ = default_reweight;
  for (int i = 0; i < grid.intervals(); i += stride) anchors_.push_back(i);
  anchors_.push_back(grid.intervals());

  envelopes_.resize(anchors_.size());
  for (std::size_t a = 0; a < anchors_.size(); ++a) {
    double best = 0.0;
    for (int r = 0; r < envelope_grid; ++r) {
      for (int c = 0; c < envelope_grid; ++c) {
        const Vec2 x{sampler_lo + (sampler_hi - sampler_lo) * (c + 0.5) / envelope_grid,
                     sampler_lo + (sampler_hi - sampler_lo) * (r + 0.5) / envelope_grid};
        best = std::max(best, reweight_(w_->value(anchors_[a], x)));
      }
    }
    envelopes_[a] = best > 0.0 ? 1.2 * best : 0.0;
  }
}

Curve StartSampler::sample(Rng& rng) const {
  std::vector<Vec2> anchor_points(anchors_.size());
  for (std::size_t a = 0; a < anchors_.size(); ++a) {
    Vec2 x{rng.uniform(sampler_lo, sampler_hi), rng.uniform(sampler_lo, sampler_hi)};
    if (envelopes_[a] > 0.0) {
      bool accepted = false;
      for (long trial = 0; trial < max_rejections; ++trial) {
        const double q = reweight_(w_->value(anchors_[a], x));
        if (rng.uniform() * envelopes_[a] <= q) {
          accepted = true;
          break;
        }
        x = {rng.uniform(sampler_lo, sampler_hi), rng.uniform(sampler_lo, sampler_hi)};
      }
      // acceptance never triggering signals a near-zero positive part;
      // the last uniform proposal is kept
      (void)accepted;
    }
    anchor_points[a] = x;
  }

  Curve curve;
  curve.nodes.resize(grid_.nodes());
  for (std::size_t a = 0; a < anchors_.size(); ++a)
    curve.nodes[anchors_[a]] = anchor_points[a];
  for (std::size_t a = 0; a + 1 < anchors_.size(); ++a) {
    const int lo = anchors_[a], hi = anchors_[a + 1];
    for (int i = lo + 1; i < hi; ++i) {
      const double tau = static_cast<double>(i - lo) / (hi - lo);
      curve.nodes[i] = (1.0 - tau) * anchor_points[a] + tau * anchor_points[a + 1];
    }
  }
  return curve;
}

Curve sample_start(const DualVariable& w, const TimeGrid& grid,
                   const std::function<double(double)>& reweight,
                   std::uint64_t seed) {
  StartSampler sampler(w, grid, reweight, 5);
  Rng rng(seed);
  return sampler.sample(rng);
}

namespace {

// Maximal open sub-intervals of [0,1] where |a(t) - b(t)| < epsilon. The
// difference is linear on each grid interval, so the boundary times solve a
// quadratic per interval.
std::vector<std::pair<double, double>> close_intervals(const Curve& a,
                                                       const Curve& b,
                                                       double epsilon) {
  const int T = a.intervals();
  std::vector<std::pair<double, double>> raw;
  for (int i = 0; i < T; ++i) {
    const Vec2 d0 = a.nodes[i] - b.nodes[i];
    const Vec2 d1 = a.nodes[i + 1] - b.nodes[i + 1];
    const Vec2 dd = d1 - d0;
    // |d0 + tau dd|^2 < eps^2 on tau in [0,1]
    const double qa = norm2(dd);
    const double qb = 2.0 * dot(d0, dd);
    const double qc = norm2(d0) - epsilon * epsilon;
    double lo = 2.0, hi = -1.0;  // empty
    if (qa < 1e-300) {
      if (std::abs(qb) < 1e-300) {
        if (qc < 0.0) { lo = 0.0; hi = 1.0; }
      } else if (qb > 0.0) {
        lo = 0.0; hi = std::min(1.0, -qc / qb);
      } else {
        lo = std::max(0.0, -qc / qb); hi = 1.0;
      }
      if (lo >= hi) { lo = 2.0; hi = -1.0; }
    } else {
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc > 0.0) {
        const double sq = std::sqrt(disc);
        lo = std::max(0.0, (-qb - sq) / (2.0 * qa));
        hi = std::min(1.0, (-qb + sq) / (2.0 * qa));
        if (lo >= hi) { lo = 2.0; hi = -1.0; }
      }
    }
    if (lo < hi)
      raw.emplace_back((i + lo) / T, (i + hi) / T);
  }
  // merge touching pieces
  std::vector<std::pair<double, double>> merged;
  for (const auto& seg : raw) {
    if (!merged.empty() && seg.first <= merged.back().second + 1e-12)
      merged.back().second = std::max(merged.back().second, seg.second);
    else
      merged.push_back(seg);
  }
  return merged;
}

Curve bridge(const Curve& head, const Curve& tail, double lo, double hi) {
  const int T = head.intervals();
  Curve out;
  out.nodes.resize(T + 1);
  const Vec2 p = head.eval(lo);
  const Vec2 q = tail.eval(hi);
  for (int i = 0; i <= T; ++i) {
    const double t = static_cast<double>(i) / T;
    if (t <= lo) {
      out.nodes[i] = head.nodes[i];
    } else if (t >= hi) {
      out.nodes[i] = tail.nodes[i];
    } else {
      const double tau = (t - lo) / (hi - lo);
      out.nodes[i] = (1.0 - tau) * p + tau * q;
    }
  }
  return out;
}

}  // namespace

std::vector<Curve> crossover(const Curve& a, const Curve& b, double epsilon,
                             double delta) {
  if (a.nodes.size() != b.nodes.size())
    throw std::invalid_argument("crossover: curves on different grids");
  if (epsilon <= 0.0 || delta <= 0.0 || delta >= 1.0)
    throw std::invalid_argument("crossover: need epsilon > 0 and delta in (0,1)");
  std::vector<Curve> out;
  for (const auto& [lo, hi] : close_intervals(a, b, epsilon)) {
    // a component spanning all of [0,1] means the curves share every route;
    // swapping would only duplicate them
    if (lo <= 1e-12 && hi >= 1.0 - 1e-12) continue;
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double blo = mid - delta * half;
    const double bhi = mid + delta * half;
    if (bhi > blo) {
      out.push_back(bridge(a, b, blo, bhi));
      out.push_back(bridge(b, a, blo, bhi));
    } else {
      // degenerate contact at a single time
      Curve ab = a, ba = b;
      for (int i = 0; i <= a.intervals(); ++i) {
        const double t = static_cast<double>(i) / a.intervals();
        if (t > mid) {
          ab.nodes[i] = b.nodes[i];
          ba.nodes[i] = a.nodes[i];
        } else if (t == mid) {
          ab.nodes[i] = ba.nodes[i] = 0.5 * (a.nodes[i] + b.nodes[i]);
        }
      }
      out.push_back(std::move(ab));
      out.push_back(std::move(ba));
    }
  }
  return out;
}

std::vector<Curve> multistart(const std::vector<Curve>& known_atoms,
                              const DualVariable& w, const TimeGrid& grid,
                              double alpha, double beta,
                              const MultistartConfig& mconfig,
                              const DescentConfig& dconfig) {
  if (known_atoms.empty() && positivity_test(w) <= 0.0) return {};

  std::vector<Curve> stationary;
  std::vector<double> values;
  std::deque<Curve> pending;

  auto near_known = [&](const Curve& candidate, double tol) {
    for (const Curve& known : stationary)
      if (curve_distance(candidate, known) < tol) return true;
    for (const Curve& queued : pending)
      if (curve_distance(candidate, queued) < tol) return true;
    return false;
  };

  auto process = [&](const DescentResult& result) {
    if (!result.curve || !result.stationary) return;
    const Curve& found = *result.curve;
    for (const Curve& known : stationary)
      if (curve_distance(found, known) < mconfig.dedup_tol) return;
    for (const Curve& known : stationary) {
      auto combined = crossover(found, known, mconfig.crossover_epsilon,
                                mconfig.crossover_delta);
      // route-sharing atoms spawn crossovers that mostly duplicate their
      // parents; enqueueing those would starve the random restarts
      for (Curve& c : combined)
        if (!near_known(c, mconfig.dedup_tol)) pending.push_back(std::move(c));
    }
    stationary.push_back(found);
    values.push_back(result.value);
  };

  // seeded descents: atoms of the current iterate always start at F < 0
  for (const Curve& atom : known_atoms)
    process(descend(atom, w, alpha, beta, dconfig));

  // restart budget alternates between the crossover queue and fresh random
  // samples so neither exploration mechanism starves the other
  std::optional<StartSampler> sampler;
  for (int k = 0; k < mconfig.max_restarts; ++k) {
    Curve start;
    const bool take_crossover = !pending.empty() && (k % 2 == 0);
    if (take_crossover) {
      start = std::move(pending.front());
      pending.pop_front();
    } else {
      if (!sampler)
        sampler.emplace(w, grid, mconfig.reweight, mconfig.sample_stride);
      Rng rng(mconfig.seed, static_cast<std::uint64_t>(k));
      start = sampler->sample(rng);
    }
    process(descend(start, w, alpha, beta, dconfig));
  }

  // order ascending by F; ties resolved by node coordinates
  std::vector<std::size_t> index(stationary.size());
  for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;
  std::sort(index.begin(), index.end(), [&](std::size_t i, std::size_t j) {
    if (values[i] != values[j]) return values[i] < values[j];
    const auto& a = stationary[i].nodes;
    const auto& b = stationary[j].nodes;
    for (std::size_t m = 0; m < a.size(); ++m) {
      if (a[m].x != b[m].x) return a[m].x < b[m].x;
      if (a[m].y != b[m].y) return a[m].y < b[m].y;
    }
    return false;
  });
  std::vector<Curve> ordered;
  ordered.reserve(index.size());
  for (std::size_t i : index) ordered.push_back(std::move(stationary[i]));

  if (!mconfig.debug_dump_path.empty()) {
    std::ofstream dump(mconfig.debug_dump_path);
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      dump << i << ',' << values[index[i]];
      for (const Vec2& p : ordered[i].nodes) dump << ',' << p.x << ',' << p.y;
      dump << '\n';
    }
  }
  return ordered;
}

}  // namespace dgcg

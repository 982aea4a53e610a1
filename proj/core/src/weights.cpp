#include "dgcg/weights.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace dgcg {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double kkt_residual(const VectorXd& c, const VectorXd& g) {
  double res = 0.0;
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    res = std::max(res, -g[j]);            // dual feasibility
    res = std::max(res, std::abs(c[j] * g[j]));  // complementarity
  }
  return std::max(res, 0.0);
}

VectorXd solve_reduced(const MatrixXd& q, const VectorXd& b,
                       const std::vector<int>& support) {
  const int m = static_cast<int>(support.size());
  MatrixXd qs(m, m);
  VectorXd bs(m);
  for (int r = 0; r < m; ++r) {
    bs[r] = -b[support[r]];
    for (int c = 0; c < m; ++c) qs(r, c) = q(support[r], support[c]);
  }
  const Eigen::LDLT<MatrixXd> ldlt(qs);
  if (ldlt.info() == Eigen::Success) {
    VectorXd x = ldlt.solve(bs);
    if ((qs * x - bs).norm() <= 1e-9 * (1.0 + bs.norm())) return x;
  }
  return qs.completeOrthogonalDecomposition().solve(bs);
}

// Lawson-Hanson style primal active-set loop for min 1/2 c'Qc + b'c over
// c >= 0 with Q positive definite. The support grows by the worst dual
// violator; infeasible reduced solutions are pulled back onto the boundary.
VectorXd nnls_active_set(const MatrixXd& q, const VectorXd& b, VectorXd c,
                         double tol) {
  const int n = static_cast<int>(b.size());
  std::vector<int> support;
  for (int j = 0; j < n; ++j)
    if (c[j] > 0.0) support.push_back(j);

  const int outer_budget = 4 * n + 20;
  for (int outer = 0; outer < outer_budget; ++outer) {
    // inner loop: make the support solution feasible
    for (int inner = 0; inner <= n + 1; ++inner) {
      if (support.empty()) {
        c.setZero();
        break;
      }
      const VectorXd x = solve_reduced(q, b, support);
      double worst = 0.0;
      for (int r = 0; r < static_cast<int>(support.size()); ++r)
        worst = std::min(worst, x[r]);
      if (worst >= 0.0) {
        c.setZero();
        for (int r = 0; r < static_cast<int>(support.size()); ++r)
          c[support[r]] = x[r];
        break;
      }
      // step from c toward x until the first coordinate hits zero
      double alpha = 1.0;
      for (int r = 0; r < static_cast<int>(support.size()); ++r) {
        if (x[r] < 0.0) {
          const double cr = c[support[r]];
          const double denom = cr - x[r];
          if (denom > 0.0) alpha = std::min(alpha, cr / denom);
        }
      }
      VectorXd next = c;
      for (int r = 0; r < static_cast<int>(support.size()); ++r) {
        const int j = support[r];
        next[j] = c[j] + alpha * (x[r] - c[j]);
      }
      c = next;
      std::vector<int> kept;
      for (int j : support)
        if (c[j] > 1e-14) kept.push_back(j);
        else c[j] = 0.0;
      if (kept.size() == support.size() && alpha == 1.0) {
        // no coordinate hit the boundary; accept x as-is
        break;
      }
      support = std::move(kept);
    }

    const VectorXd g = q * c + b;
    int entering = -1;
    double most_negative = -0.5 * tol;
    for (int j = 0; j < n; ++j) {
      const bool active =
          std::find(support.begin(), support.end(), j) != support.end();
      if (!active && g[j] < most_negative) {
        most_negative = g[j];
        entering = j;
      }
    }
    if (entering < 0) break;
    support.push_back(entering);
  }
  return c;
}

}  // namespace

QuadraticProgram assemble_qp(const std::vector<Curve>& curves,
                             const Problem& problem) {
  if (curves.empty()) throw std::invalid_argument("assemble_qp: no curves");
  const int n = static_cast<int>(curves.size());
  const int times = problem.grid.nodes();

  std::vector<double> a(n);
  std::vector<std::vector<MeasurementVector>> psi(n);
  for (int j = 0; j < n; ++j) {
    if (curves[j].intervals() != problem.grid.intervals())
      throw std::invalid_argument("assemble_qp: curve does not match grid");
    a[j] = normalization(curves[j], problem.alpha, problem.beta);
    psi[j].resize(times);
    for (int i = 0; i < times; ++i)
      psi[j][i] = kernel(problem.schedule, i, curves[j].eval(problem.grid.t(i)));
  }

  QuadraticProgram qp;
  qp.n = n;
  qp.gamma.assign(static_cast<std::size_t>(n) * n, 0.0);
  qp.b.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    for (int k = j; k < n; ++k) {
      double sum = 0.0;
      for (int i = 0; i < times; ++i) sum += h_inner(psi[j][i], psi[k][i]);
      const double value = a[j] * a[k] * sum / times;
      qp.at(j, k) = value;
      qp.at(k, j) = value;
    }
    double data_sum = 0.0;
    for (int i = 0; i < times; ++i) data_sum += h_inner(psi[j][i], problem.data[i]);
    qp.b[j] = 1.0 - a[j] * data_sum / times;
  }
  return qp;
}

NnqpResult solve_nnqp(const QuadraticProgram& qp, double tol,
                      const std::vector<double>* warm_start) {
  const int n = qp.n;
  if (n < 1) throw std::invalid_argument("solve_nnqp: empty program");
  Eigen::Map<const MatrixXd> gamma(qp.gamma.data(), n, n);
  Eigen::Map<const VectorXd> b(qp.b.data(), n);

  VectorXd c = VectorXd::Zero(n);
  if (warm_start) {
    if (static_cast<int>(warm_start->size()) != n)
      throw std::invalid_argument("solve_nnqp: warm start has wrong length");
    for (int j = 0; j < n; ++j) c[j] = std::max((*warm_start)[j], 0.0);
  }
  VectorXd g = gamma * c + b;

  // projected gradient with Barzilai-Borwein steps
  double row_scale = 0.0;
  for (int j = 0; j < n; ++j) row_scale = std::max(row_scale, gamma.row(j).lpNorm<1>());
  double tau = row_scale > 0.0 ? 1.0 / row_scale : 1.0;
  int iterations = 0;
  constexpr int pg_budget = 2000;
  for (; iterations < pg_budget; ++iterations) {
    if (kkt_residual(c, g) <= 0.1 * tol) break;
    VectorXd c_next = (c - tau * g).cwiseMax(0.0);
    VectorXd g_next = gamma * c_next + b;
    const VectorXd s = c_next - c;
    if (s.norm() == 0.0) break;
    const VectorXd y = g_next - g;
    const double sy = s.dot(y);
    tau = sy > 1e-300 ? std::clamp(s.dot(s) / sy, 1e-8, 1e8)
                      : (row_scale > 0.0 ? 1.0 / row_scale : 1.0);
    c = std::move(c_next);
    g = std::move(g_next);
  }

  // active-set polish on a hair-ridged system: the ridge keeps degenerate
  // Gram matrices (near-duplicate atoms) strictly convex while perturbing
  // the optimum orders of magnitude below the KKT tolerance. The polish
  // starts cold so that degenerate optimal faces resolve to a vertex with
  // small support instead of the weight-spreading interior point the
  // projected-gradient iterates drift to.
  double diag_max = 0.0;
  for (int j = 0; j < n; ++j) diag_max = std::max(diag_max, gamma(j, j));
  const double ridge = std::max(1e-12 * diag_max, 1e-300);
  MatrixXd ridged = gamma;
  for (int j = 0; j < n; ++j) ridged(j, j) += ridge;
  c = nnls_active_set(ridged, b, VectorXd::Zero(n), tol);

  // the ridged pass pins down the support; re-solving without the ridge
  // removes its bias (least-norm when duplicate atoms make it singular)
  std::vector<int> support;
  for (int j = 0; j < n; ++j)
    if (c[j] > 0.0) support.push_back(j);
  if (!support.empty()) {
    const VectorXd x = solve_reduced(gamma, b, support);
    double worst = 0.0;
    for (int r = 0; r < static_cast<int>(support.size()); ++r)
      worst = std::min(worst, x[r]);
    if (worst >= -1e-12) {
      VectorXd exact = VectorXd::Zero(n);
      for (int r = 0; r < static_cast<int>(support.size()); ++r)
        exact[support[r]] = std::max(x[r], 0.0);
      if (kkt_residual(exact, gamma * exact + b) <= kkt_residual(c, gamma * c + b))
        c = std::move(exact);
    }
  }

  g = gamma * c + b;
  const double residual = kkt_residual(c, g);
  NnqpResult result;
  result.weights.assign(c.data(), c.data() + n);
  result.kkt_residual = residual;
  result.iterations = iterations;
  if (residual > tol)
    throw NnqpError("solve_nnqp: KKT tolerance not reached", result.weights,
                    residual);
  return result;
}

}  // namespace dgcg

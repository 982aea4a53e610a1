#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "dgcg/problem.hpp"

namespace dgcg {

// min over c >= 0 of 1/2 c' Gamma c + b' c; Gamma is the Gram matrix of the
// atoms' forward images, so it is symmetric positive semi-definite.
struct QuadraticProgram {
  int n = 0;
  std::vector<double> gamma;  // row-major n x n
  std::vector<double> b;

  double& at(int i, int j) { return gamma[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return gamma[static_cast<std::size_t>(i) * n + j]; }
};

// Gamma_{jk} = a_j a_k/(T+1) sum_i <psi(c_j(t_i)), psi(c_k(t_i))>,
// b_j = 1 - a_j/(T+1) sum_i <psi(c_j(t_i)), f_i>. The quadratic form plus
// the problem's m0 reproduces the objective on conic combinations.
QuadraticProgram assemble_qp(const std::vector<Curve>& curves,
                             const Problem& problem);

struct NnqpResult {
  std::vector<double> weights;
  double kkt_residual = 0.0;
  int iterations = 0;
};

class NnqpError : public std::runtime_error {
 public:
  NnqpError(std::string message, std::vector<double> best, double residual)
      : std::runtime_error(std::move(message)),
        best_weights(std::move(best)),
        kkt_residual(residual) {}

  std::vector<double> best_weights;
  double kkt_residual;
};

// Projected Barzilai-Borwein gradient steps followed by an active-set polish
// that solves the reduced system exactly. The result satisfies c >= 0,
// (Gamma c + b)_j >= -tol and |c_j (Gamma c + b)_j| <= tol.
NnqpResult solve_nnqp(const QuadraticProgram& qp, double tol = 1e-9,
                      const std::vector<double>* warm_start = nullptr);

}  // namespace dgcg

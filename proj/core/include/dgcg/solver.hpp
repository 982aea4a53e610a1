#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dgcg/insertion.hpp"
#include "dgcg/problem.hpp"
#include "dgcg/sliding.hpp"

namespace dgcg {

enum class SolverMode { core, full };

enum class Termination {
  converged,        // best insertion pairing <= 1, exact optimality signal
  gap_below_tol,    // 0 < gap < tol
  empty_insertion,  // no stationary curve at iteration 0 (zero is optimal)
  budget,           // outer iteration limit reached
};

const char* to_string(Termination reason);

struct SolverConfig {
  SolverMode mode = SolverMode::full;
  double tol = 1e-10;  // stopping tolerance on the Lambda gap
  int max_outer_iterations = 40;
  int coordination_rounds = 2;  // alternations of coefficient solve + slide
  std::uint64_t seed = 0;
  MultistartConfig multistart;
  DescentConfig descent;
  SlideConfig slide;
  double nnqp_tol = 1e-9;
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double fidelity = 0.0;
  double regularizer = 0.0;
  double gap = 0.0;
  int atom_count = 0;
  double wallclock_s = 0.0;
};

struct SolveReport {
  SparseMeasure measure;
  std::vector<IterationRecord> history;  // one row per iterate, including 0
  Termination reason = Termination::budget;
  int iterations = 0;
  double final_gap = 0.0;
  // Largest |pairing - 1| observed over retained atoms right after any
  // coefficient step.
  double max_first_order_error = 0.0;
};

// Dynamic generalized conditional gradient. Core mode inserts only the best
// stationary curve and runs a single coefficient solve per iteration; full
// mode inserts every stationary curve found and alternates coefficient solves
// with sliding.
SolveReport solve(const Problem& problem, const SolverConfig& config);

// Convergence log rows: iter,objective,fidelity,regularizer,gap,n_atoms,wallclock_s.
std::string history_to_csv(const std::vector<IterationRecord>& history);

}  // namespace dgcg

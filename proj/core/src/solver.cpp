#include "dgcg/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "dgcg/weights.hpp"

namespace dgcg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<Curve> curves_of(const SparseMeasure& measure) {
  std::vector<Curve> curves;
  curves.reserve(measure.atoms.size());
  for (const Atom& a : measure.atoms) curves.push_back(a.curve);
  return curves;
}

SparseMeasure build_measure(const Problem& problem,
                            const std::vector<Curve>& curves,
                            const std::vector<double>& weights) {
  SparseMeasure measure;
  measure.alpha = problem.alpha;
  measure.beta = problem.beta;
  for (std::size_t j = 0; j < curves.size(); ++j)
    if (weights[j] > weight_deletion_threshold)
      measure.atoms.push_back(Atom{weights[j], curves[j]});
  return measure;
}

// Pairing of every retained atom against the dual variable of the fresh
// weights; exact coefficient optimality makes each of these 1.
double first_order_error(const SparseMeasure& measure, const Problem& problem) {
  if (measure.atoms.empty()) return 0.0;
  const DualVariable w = dual_variable(measure, problem);
  double err = 0.0;
  for (const Atom& a : measure.atoms)
    err = std::max(err,
                   std::abs(pairing(a.curve, w, problem.alpha, problem.beta) - 1.0));
  return err;
}

}  // namespace

const char* to_string(Termination reason) {
  switch (reason) {
    case Termination::converged: return "converged";
    case Termination::gap_below_tol: return "gap_below_TOL";
    case Termination::empty_insertion: return "empty_insertion";
    case Termination::budget: return "budget";
  }
  return "unknown";
}

SolveReport solve(const Problem& problem, const SolverConfig& config) {
  if (config.tol <= 0.0) throw std::invalid_argument("solver tol must be positive");
  const auto start_time = Clock::now();
  const double m0 = problem.m0();

  SolveReport report;
  SparseMeasure measure;
  measure.alpha = problem.alpha;
  measure.beta = problem.beta;

  double previous_objective = m0;

  for (int n = 0;; ++n) {
    const ObjectiveParts parts = objective(measure, problem);
    const DualVariable w = dual_variable(measure, problem);

    MultistartConfig mconfig = config.multistart;
    mconfig.seed = mix_seed(config.seed, static_cast<std::uint64_t>(n));
    const std::vector<Curve> atoms = curves_of(measure);
    std::vector<Curve> stationary = multistart(
        atoms, w, problem.grid, problem.alpha, problem.beta, mconfig,
        config.descent);

    IterationRecord row;
    row.iteration = n;
    row.objective = parts.total;
    row.fidelity = parts.fidelity;
    row.regularizer = parts.regularizer;
    row.atom_count = static_cast<int>(measure.atoms.size());
    row.wallclock_s = seconds_since(start_time);

    if (stationary.empty()) {
      if (n > 0)
        throw std::logic_error(
            "multistart returned no stationary curve after iteration 0; seeded "
            "atoms guarantee at least one");
      row.gap = 0.0;  // P(w) <= 0 certifies the zero measure
      report.history.push_back(row);
      report.reason = Termination::empty_insertion;
      report.iterations = n;
      report.final_gap = 0.0;
      break;
    }

    const double best_pairing =
        -insertion_value(stationary.front(), w, problem.alpha, problem.beta);
    const double gap = lambda_gap(best_pairing, m0);
    row.gap = gap;
    report.history.push_back(row);

    if (gap == 0.0) {
      report.reason = Termination::converged;
      report.iterations = n;
      report.final_gap = gap;
      break;
    }
    if (gap < config.tol) {
      report.reason = Termination::gap_below_tol;
      report.iterations = n;
      report.final_gap = gap;
      break;
    }
    if (n >= config.max_outer_iterations) {
      report.reason = Termination::budget;
      report.iterations = n;
      report.final_gap = gap;
      break;
    }

    // insertion: core mode keeps the best candidate, full mode all of them
    std::vector<Curve> curves = atoms;
    std::vector<double> weights;
    weights.reserve(curves.size());
    for (const Atom& a : measure.atoms) weights.push_back(a.weight);
    const std::size_t insert_count =
        config.mode == SolverMode::core ? 1 : stationary.size();
    for (std::size_t s = 0; s < insert_count; ++s) {
      bool duplicate = false;
      for (const Curve& existing : curves) {
        if (existing.nodes.size() == stationary[s].nodes.size() &&
            curve_distance(existing, stationary[s]) <= curve_identity_tol) {
          duplicate = true;
          break;
        }
      }
      if (!duplicate) {
        curves.push_back(stationary[s]);
        weights.push_back(0.0);
      }
    }

    const int rounds =
        config.mode == SolverMode::core ? 1 : std::max(1, config.coordination_rounds);
    for (int k = 0; k < rounds; ++k) {
      const QuadraticProgram qp = assemble_qp(curves, problem);
      const NnqpResult coeff = solve_nnqp(qp, config.nnqp_tol, &weights);
      measure = build_measure(problem, curves, coeff.weights);
      report.max_first_order_error =
          std::max(report.max_first_order_error, first_order_error(measure, problem));
      if (config.mode == SolverMode::full)
        measure = slide(measure, problem, config.slide);
      curves = curves_of(measure);
      weights.clear();
      for (const Atom& a : measure.atoms) weights.push_back(a.weight);
    }

    const double new_objective = objective(measure, problem).total;
    if (new_objective > previous_objective + 1e-10) {
      char msg[160];
      std::snprintf(msg, sizeof(msg),
                    "objective increased at iteration %d: %.17g -> %.17g", n,
                    previous_objective, new_objective);
      throw std::logic_error(msg);
    }
    previous_objective = new_objective;
  }

  report.measure = measure;
  return report;
}

std::string history_to_csv(const std::vector<IterationRecord>& history) {
  std::string out = "iter,objective,fidelity,regularizer,gap,n_atoms,wallclock_s\n";
  char line[256];
  for (const IterationRecord& row : history) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g,%.17g,%d,%.3f\n",
                  row.iteration, row.objective, row.fidelity, row.regularizer,
                  row.gap, row.atom_count, row.wallclock_s);
    out += line;
  }
  return out;
}

}  // namespace dgcg

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dgcg/solver.hpp"

namespace dgcg {

struct ScheduleSpec {
  enum class Kind { spiral, rotating_lines, file };
  Kind kind = Kind::spiral;
  // spiral
  int n = 20;
  double pitch = 4.0;
  double max_radius = 4.0;
  // rotating lines
  int lines = 4;
  double spacing = 1.0;
  int per_time = 15;
  // explicit schedule file
  std::string path;
};

struct GroundTruthAtom {
  double intensity = 1.0;
  // either a parametric line or an explicit node list
  std::optional<std::pair<Vec2, Vec2>> line;
  std::vector<Vec2> nodes;
};

struct ExperimentConfig {
  int T = 50;
  double alpha = 0.1;
  double beta = 0.1;
  ScheduleSpec schedule;
  std::vector<GroundTruthAtom> ground_truth;
  std::string data_file;  // load measurements instead of synthesizing
  double noise_level = 0.0;
  std::uint64_t noise_seed = 0;
  SolverConfig solver;
  std::string output_dir = "out";
  int raster_resolution = 128;
  std::vector<int> raster_times;
  std::string base_dir;  // directory the config was loaded from
};

ExperimentConfig load_experiment_config(const std::string& path);

FrequencySchedule build_schedule(const ExperimentConfig& config);
SparseMeasure build_ground_truth(const ExperimentConfig& config);
Problem build_problem(const ExperimentConfig& config);

// Relative discrepancy D = |truth - recon|_L2 / |truth|_L2 on the node grid.
double curve_discrepancy(const Curve& truth, const Curve& recon);
// Mean over nodes of |truth(t_i) - recon(t_i)|.
double mean_position_error(const Curve& truth, const Curve& recon);

struct CurveMatch {
  int truth_index = -1;
  int recon_index = -1;
  double discrepancy = 0.0;
  double mean_position_error = 0.0;
};

struct MatchReport {
  std::vector<CurveMatch> matches;      // greedy minimal-D assignment
  std::vector<int> unmatched_truth;
  std::vector<int> artifacts;           // unmatched atoms below 5% intensity
  std::vector<int> unmatched_recon;     // unmatched atoms above the cut
};

MatchReport match_curves(const SparseMeasure& recon,
                         const std::vector<Curve>& truth_curves);

struct ExperimentResult {
  Problem problem;
  std::optional<SparseMeasure> truth;
  SolveReport report;
  double relative_residual = 0.0;  // sqrt(2 (T+1) fidelity) / |f|
  std::optional<MatchReport> matching;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

// Writes recon.json, convergence.csv, summary.json and the requested
// backprojection rasters into config.output_dir.
void write_artifacts(const ExperimentConfig& config,
                     const ExperimentResult& result);

// Exit status of a solver run: 0 converged or gap below tolerance (or an
// empty insertion certificate), 2 budget exhausted.
int exit_code(Termination reason);

// CLI entry points.
int command_run(const ExperimentConfig& config);
int command_synth(const ExperimentConfig& config);
int command_backproject(const ExperimentConfig& config,
                        const std::vector<int>& times);

}  // namespace dgcg

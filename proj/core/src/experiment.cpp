#include "dgcg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dgcg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path);
}

Vec2 parse_point(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw std::invalid_argument("expected a [x, y] pair");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

std::string resolve(const std::string& base, const std::string& path) {
  fs::path p(path);
  if (p.is_absolute() || base.empty()) return path;
  return (fs::path(base) / p).string();
}

void parse_solver(const json& j, SolverConfig& solver) {
  if (j.contains("mode")) {
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "core") solver.mode = SolverMode::core;
    else if (mode == "full") solver.mode = SolverMode::full;
    else throw std::invalid_argument("solver.mode must be \"core\" or \"full\"");
  }
  if (j.contains("tol")) solver.tol = j.at("tol").get<double>();
  if (j.contains("max_outer_iterations"))
    solver.max_outer_iterations = j.at("max_outer_iterations").get<int>();
  if (j.contains("K_max")) solver.coordination_rounds = j.at("K_max").get<int>();
  if (j.contains("seed")) solver.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("multistart")) {
    const json& m = j.at("multistart");
    if (m.contains("N_max")) solver.multistart.max_restarts = m.at("N_max").get<int>();
    if (m.contains("epsilon"))
      solver.multistart.crossover_epsilon = m.at("epsilon").get<double>();
    if (m.contains("delta"))
      solver.multistart.crossover_delta = m.at("delta").get<double>();
    if (m.contains("dedup_tol"))
      solver.multistart.dedup_tol = m.at("dedup_tol").get<double>();
    if (m.contains("sample_stride"))
      solver.multistart.sample_stride = m.at("sample_stride").get<int>();
  }
  if (j.contains("descent")) {
    const json& d = j.at("descent");
    if (d.contains("max_iterations"))
      solver.descent.max_iterations = d.at("max_iterations").get<int>();
    if (d.contains("stationarity_tol"))
      solver.descent.stationarity_tol = d.at("stationarity_tol").get<double>();
    if (d.contains("initial_step"))
      solver.descent.initial_step = d.at("initial_step").get<double>();
    if (d.contains("h1_preconditioner"))
      solver.descent.h1_preconditioner = d.at("h1_preconditioner").get<bool>();
  }
  if (j.contains("slide")) {
    const json& s = j.at("slide");
    if (s.contains("inner_steps"))
      solver.slide.inner_steps = s.at("inner_steps").get<int>();
    if (s.contains("stationarity_tol"))
      solver.slide.stationarity_tol = s.at("stationarity_tol").get<double>();
  }
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  json j;
  try {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    j = json::parse(in);  // parse errors carry line/column diagnostics
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error in ") + path +
                                ": " + e.what());
  }

  ExperimentConfig config;
  config.base_dir = fs::path(path).parent_path().string();
  config.T = j.at("T").get<int>();
  config.alpha = j.at("alpha").get<double>();
  config.beta = j.at("beta").get<double>();

  const json& sched = j.at("schedule");
  const std::string kind = sched.at("type").get<std::string>();
  if (kind == "spiral") {
    config.schedule.kind = ScheduleSpec::Kind::spiral;
    if (sched.contains("n")) config.schedule.n = sched.at("n").get<int>();
    if (sched.contains("pitch")) config.schedule.pitch = sched.at("pitch").get<double>();
    if (sched.contains("max_radius"))
      config.schedule.max_radius = sched.at("max_radius").get<double>();
  } else if (kind == "rotating_lines") {
    config.schedule.kind = ScheduleSpec::Kind::rotating_lines;
    if (sched.contains("lines")) config.schedule.lines = sched.at("lines").get<int>();
    if (sched.contains("spacing"))
      config.schedule.spacing = sched.at("spacing").get<double>();
    if (sched.contains("count")) config.schedule.per_time = sched.at("count").get<int>();
  } else if (kind == "file") {
    config.schedule.kind = ScheduleSpec::Kind::file;
    config.schedule.path = resolve(config.base_dir, sched.at("path").get<std::string>());
    if (!fs::exists(config.schedule.path))
      throw std::invalid_argument("schedule file does not exist: " + config.schedule.path);
  } else {
    throw std::invalid_argument("unknown schedule type: " + kind);
  }

  if (j.contains("ground_truth")) {
    for (const json& ja : j.at("ground_truth").at("atoms")) {
      GroundTruthAtom atom;
      atom.intensity = ja.at("intensity").get<double>();
      if (ja.contains("line")) {
        atom.line = std::make_pair(parse_point(ja.at("line").at("from")),
                                   parse_point(ja.at("line").at("to")));
      } else {
        for (const json& p : ja.at("nodes")) atom.nodes.push_back(parse_point(p));
      }
      config.ground_truth.push_back(std::move(atom));
    }
  }
  if (j.contains("data_file")) {
    config.data_file = resolve(config.base_dir, j.at("data_file").get<std::string>());
    if (!fs::exists(config.data_file))
      throw std::invalid_argument("data file does not exist: " + config.data_file);
  }
  if (config.ground_truth.empty() && config.data_file.empty())
    throw std::invalid_argument("config needs ground_truth atoms or a data_file");

  if (j.contains("noise")) {
    config.noise_level = j.at("noise").at("level").get<double>();
    if (j.at("noise").contains("seed"))
      config.noise_seed = j.at("noise").at("seed").get<std::uint64_t>();
  }
  if (j.contains("solver")) parse_solver(j.at("solver"), config.solver);
  if (j.contains("output_dir"))
    config.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("raster_resolution"))
    config.raster_resolution = j.at("raster_resolution").get<int>();
  if (j.contains("raster_times"))
    for (const json& t : j.at("raster_times"))
      config.raster_times.push_back(t.get<int>());
  return config;
}

FrequencySchedule build_schedule(const ExperimentConfig& config) {
  const int times = config.T + 1;
  switch (config.schedule.kind) {
    case ScheduleSpec::Kind::spiral:
      return spiral_schedule(times, config.schedule.n, config.schedule.pitch,
                             config.schedule.max_radius);
    case ScheduleSpec::Kind::rotating_lines:
      return rotating_line_schedule(times, config.schedule.lines,
                                    config.schedule.spacing,
                                    config.schedule.per_time);
    case ScheduleSpec::Kind::file: {
      FrequencySchedule schedule = schedule_from_json(read_file(config.schedule.path));
      if (schedule.times() != times)
        throw std::invalid_argument("schedule file length does not match T+1");
      return schedule;
    }
  }
  throw std::logic_error("unreachable schedule kind");
}

SparseMeasure build_ground_truth(const ExperimentConfig& config) {
  const TimeGrid grid(config.T);
  SparseMeasure truth;
  truth.alpha = config.alpha;
  truth.beta = config.beta;
  for (const GroundTruthAtom& atom : config.ground_truth) {
    Curve curve;
    if (atom.line) {
      curve = linear_curve(atom.line->first, atom.line->second, grid);
    } else {
      if (static_cast<int>(atom.nodes.size()) != grid.nodes())
        throw std::invalid_argument("ground-truth node list does not match T+1");
      curve.nodes = atom.nodes;
    }
    // weight chosen so the atom carries the requested intensity
    const double weight =
        atom.intensity * curve_energy(curve, config.alpha, config.beta);
    truth.add_atom(weight, std::move(curve));
  }
  return truth;
}

Problem build_problem(const ExperimentConfig& config) {
  const TimeGrid grid(config.T);
  FrequencySchedule schedule = build_schedule(config);
  Measurements data;
  if (!config.data_file.empty()) {
    data = measurements_from_json(read_file(config.data_file));
  } else {
    data = synthesize(build_ground_truth(config), schedule, grid);
  }
  if (config.noise_level > 0.0)
    data = add_noise(data, config.noise_level, config.noise_seed);
  return Problem(grid, std::move(schedule), std::move(data), config.alpha,
                 config.beta);
}

double curve_discrepancy(const Curve& truth, const Curve& recon) {
  if (truth.nodes.size() != recon.nodes.size())
    throw std::invalid_argument("curve_discrepancy: node counts differ");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < truth.nodes.size(); ++i) {
    num += norm2(truth.nodes[i] - recon.nodes[i]);
    den += norm2(truth.nodes[i]);
  }
  if (den == 0.0) throw std::invalid_argument("curve_discrepancy: zero truth curve");
  return std::sqrt(num / den);
}

double mean_position_error(const Curve& truth, const Curve& recon) {
  if (truth.nodes.size() != recon.nodes.size())
    throw std::invalid_argument("mean_position_error: node counts differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.nodes.size(); ++i)
    sum += norm(truth.nodes[i] - recon.nodes[i]);
  return sum / truth.nodes.size();
}

MatchReport match_curves(const SparseMeasure& recon,
                         const std::vector<Curve>& truth_curves) {
  MatchReport report;
  const int nt = static_cast<int>(truth_curves.size());
  const int nr = static_cast<int>(recon.atoms.size());
  std::vector<bool> truth_used(nt, false), recon_used(nr, false);

  const int pairs = std::min(nt, nr);
  for (int step = 0; step < pairs; ++step) {
    int best_t = -1, best_r = -1;
    double best_d = 0.0;
    for (int t = 0; t < nt; ++t) {
      if (truth_used[t]) continue;
      for (int r = 0; r < nr; ++r) {
        if (recon_used[r]) continue;
        const double d = curve_discrepancy(truth_curves[t], recon.atoms[r].curve);
        if (best_t < 0 || d < best_d) {
          best_d = d;
          best_t = t;
          best_r = r;
        }
      }
    }
    truth_used[best_t] = true;
    recon_used[best_r] = true;
    report.matches.push_back(
        {best_t, best_r, best_d,
         mean_position_error(truth_curves[best_t], recon.atoms[best_r].curve)});
  }
  for (int t = 0; t < nt; ++t)
    if (!truth_used[t]) report.unmatched_truth.push_back(t);

  double max_intensity = 0.0;
  for (int r = 0; r < nr; ++r)
    max_intensity = std::max(max_intensity, recon.intensity_of(r));
  for (int r = 0; r < nr; ++r) {
    if (recon_used[r]) continue;
    if (recon.intensity_of(r) < 0.05 * max_intensity)
      report.artifacts.push_back(r);
    else
      report.unmatched_recon.push_back(r);
  }
  return report;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  Problem problem = build_problem(config);
  std::optional<SparseMeasure> truth;
  if (!config.ground_truth.empty()) truth = build_ground_truth(config);

  SolveReport report = solve(problem, config.solver);

  ExperimentResult result{std::move(problem), std::move(truth),
                          std::move(report), 0.0, std::nullopt};
  const double data_norm2 = 2.0 * result.problem.grid.nodes() * result.problem.m0();
  if (data_norm2 > 0.0 && !result.report.history.empty()) {
    const double fid = result.report.history.back().fidelity;
    result.relative_residual =
        std::sqrt(2.0 * result.problem.grid.nodes() * fid / data_norm2);
  }
  if (result.truth) {
    std::vector<Curve> truth_curves;
    for (const Atom& a : result.truth->atoms) truth_curves.push_back(a.curve);
    result.matching = match_curves(result.report.measure, truth_curves);
  }
  return result;
}

void write_artifacts(const ExperimentConfig& config,
                     const ExperimentResult& result) {
  fs::create_directories(config.output_dir);
  const fs::path out(config.output_dir);

  write_file((out / "recon.json").string(), measure_to_json(result.report.measure));
  write_file((out / "convergence.csv").string(),
             history_to_csv(result.report.history));

  json summary;
  summary["termination_reason"] = to_string(result.report.reason);
  summary["iterations"] = result.report.iterations;
  if (!result.report.history.empty()) {
    const IterationRecord& last = result.report.history.back();
    summary["final_objective"] = last.objective;
    summary["fidelity"] = last.fidelity;
    summary["regularizer"] = last.regularizer;
    summary["wallclock_s"] = last.wallclock_s;
  }
  summary["final_gap"] = result.report.final_gap;
  summary["max_first_order_error"] = result.report.max_first_order_error;
  summary["relative_residual"] = result.relative_residual;
  summary["atom_intensities"] = json::array();
  for (std::size_t r = 0; r < result.report.measure.atoms.size(); ++r)
    summary["atom_intensities"].push_back(result.report.measure.intensity_of(r));
  if (result.matching) {
    json matches = json::array();
    for (const CurveMatch& m : result.matching->matches) {
      matches.push_back({{"truth", m.truth_index},
                         {"recon", m.recon_index},
                         {"D", m.discrepancy},
                         {"mean_position_error", m.mean_position_error}});
    }
    summary["matches"] = std::move(matches);
    summary["artifacts"] = result.matching->artifacts;
    summary["unmatched_truth"] = result.matching->unmatched_truth;
    summary["unmatched_recon"] = result.matching->unmatched_recon;
  }
  write_file((out / "summary.json").string(), summary.dump(2));

  for (int i : config.raster_times) {
    if (i < 0 || i >= result.problem.grid.nodes())
      throw std::invalid_argument("raster time index out of range");
    const RasterImage img = backprojection_raster(
        result.problem.data, result.problem.schedule, i, config.raster_resolution);
    char name[48];
    std::snprintf(name, sizeof(name), "backprojection_%04d.pgm", i);
    write_pgm(img, (out / name).string());
  }
}

int exit_code(Termination reason) {
  switch (reason) {
    case Termination::converged:
    case Termination::gap_below_tol:
    case Termination::empty_insertion:
      return 0;
    case Termination::budget:
      return 2;
  }
  return 1;
}

int command_run(const ExperimentConfig& config) {
  const ExperimentResult result = run_experiment(config);
  write_artifacts(config, result);
  std::printf("%s after %d iterations, objective %.12g, gap %.3g, %zu atoms\n",
              to_string(result.report.reason), result.report.iterations,
              result.report.history.empty() ? 0.0
                                            : result.report.history.back().objective,
              result.report.final_gap, result.report.measure.atoms.size());
  return exit_code(result.report.reason);
}

int command_synth(const ExperimentConfig& config) {
  const Problem problem = build_problem(config);
  fs::create_directories(config.output_dir);
  const fs::path out(config.output_dir);
  // bare schedule / measurements layouts, reusable via
  // {"schedule": {"type": "file", ...}, "data_file": ...}
  write_file((out / "schedule.json").string(), schedule_to_json(problem.schedule));
  write_file((out / "data.json").string(), measurements_to_json(problem.data));
  std::printf("wrote %s and %s\n", (out / "schedule.json").string().c_str(),
              (out / "data.json").string().c_str());
  return 0;
}

int command_backproject(const ExperimentConfig& config,
                        const std::vector<int>& times) {
  const Problem problem = build_problem(config);
  fs::create_directories(config.output_dir);
  for (int i : times) {
    if (i < 0 || i >= problem.grid.nodes())
      throw std::invalid_argument("backproject: time index out of range");
    const RasterImage img = backprojection_raster(problem.data, problem.schedule,
                                                  i, config.raster_resolution);
    char name[48];
    std::snprintf(name, sizeof(name), "backprojection_%04d.pgm", i);
    write_pgm(img, (fs::path(config.output_dir) / name).string());
  }
  return 0;
}

}  // namespace dgcg

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dgcg/experiment.hpp"

namespace {

dgcg::ExperimentConfig load(const std::string& config_path,
                            const std::string& out_dir,
                            const std::string& mode, bool have_seed,
                            std::uint64_t seed) {
  dgcg::ExperimentConfig config = dgcg::load_experiment_config(config_path);
  if (!out_dir.empty()) config.output_dir = out_dir;
  if (have_seed) config.solver.seed = seed;
  if (mode == "core") config.solver.mode = dgcg::SolverMode::core;
  else if (mode == "full") config.solver.mode = dgcg::SolverMode::full;
  else if (!mode.empty())
    throw CLI::ValidationError("--mode must be core or full");
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse dynamic reconstruction by dynamic generalized "
               "conditional gradient"};
  app.require_subcommand(1);

  std::string config_path, out_dir, mode;
  std::uint64_t seed = 0;
  bool have_seed = false;
  std::vector<int> times;

  CLI::App* run = app.add_subcommand("run", "solve a reconstruction problem");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory override");
  run->add_option("--seed", seed, "solver seed override")
      ->each([&](const std::string&) { have_seed = true; });
  run->add_option("--mode", mode, "core|full override");

  CLI::App* synth = app.add_subcommand("synth", "synthesize data only");
  synth->add_option("config", config_path, "experiment config (JSON)")->required();
  synth->add_option("--out", out_dir, "output directory override");

  CLI::App* backproject =
      app.add_subcommand("backproject", "rasterize backprojections");
  backproject->add_option("config", config_path, "experiment config (JSON)")
      ->required();
  backproject->add_option("--times", times, "time indices")
      ->required()
      ->delimiter(',');
  backproject->add_option("--out", out_dir, "output directory override");

  CLI11_PARSE(app, argc, argv);

  try {
    const dgcg::ExperimentConfig config =
        load(config_path, out_dir, mode, have_seed, seed);
    if (run->parsed()) return dgcg::command_run(config);
    if (synth->parsed()) return dgcg::command_synth(config);
    if (backproject->parsed()) return dgcg::command_backproject(config, times);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}

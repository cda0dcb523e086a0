#include <CLI11.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <thread>

#include "ruin/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ruin: finite-time ruin asymptotics and Monte-Carlo verification for aggregate "
               "Gaussian risk processes"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 1;
  std::string out_dir = ".";
  std::string format = "csv";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config file")->required();
    cmd->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
      seed_set = true;
    });
    cmd->add_option("--workers", workers, "worker threads (0 = hardware)");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--format", format, "output format (csv)");
  };

  const char* commands[] = {"asym", "simulate", "constants", "perturbed", "report"};
  const char* blurbs[] = {
      "evaluate the first-order ruin asymptotics over a u grid",
      "estimate the crossing probability by crude / importance-sampling Monte Carlo",
      "estimate Pickands / Piterbarg constants",
      "tail-equivalence ratio report for a perturbed Levy risk process",
      "grid-bias convergence study for the crossing probability",
  };
  for (int i = 0; i < 5; ++i) add_common(app.add_subcommand(commands[i], blurbs[i]));

  CLI11_PARSE(app, argc, argv);

  ruin::RunOptions opts;
  opts.command = app.get_subcommands().front()->get_name();
  opts.config_path = config_path;
  if (seed_set) opts.seed_override = seed;
  opts.workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  opts.out_dir = out_dir;
  opts.format = format;
  return ruin::run_experiment_exit_code(opts);
}

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ruin/config.hpp"
#include "ruin/model.hpp"

namespace ruin {

struct RunOptions {
  std::string command;  // asym | simulate | constants | perturbed | report
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  int workers = 1;
  std::string out_dir = ".";
  std::string format = "csv";
};

// Parses, validates and runs one experiment; writes CSV artifacts atomically
// plus a manifest sidecar. Throws ConfigError / NumericError / IoError.
void run_experiment(const RunOptions& opts);

// Exit-code wrapper: 0 ok, 1 config, 2 numerical, 3 I/O.
int run_experiment_exit_code(const RunOptions& opts);

// Builds the aggregate model from a [model] section (shared by commands and
// tests).
AggregateModel model_from_config(ConfigReader model_section);

}  // namespace ruin

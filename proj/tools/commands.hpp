#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace stefan::cli {

struct CommandContext {
  RunConfig cfg;
  std::filesystem::path out_dir;
  std::ostream& out;
};

// Each command writes its artifacts plus `config.resolved` into out_dir, prints
// a short report to `out`, and returns the process exit code. Errors propagate
// as InputError / NumericalError / ConfigError.

int cmd_ingest(CommandContext& ctx, const std::string& quotes_path, const std::string& volumes_path);
int cmd_simulate(CommandContext& ctx);
int cmd_mc(CommandContext& ctx, bool write_trajectories);
int cmd_scenario(CommandContext& ctx);
int cmd_density(CommandContext& ctx, const std::vector<double>& at, double t);
int cmd_check_scaling(CommandContext& ctx);
int cmd_ito_check(CommandContext& ctx);
int cmd_portfolio(CommandContext& ctx, const std::string& input_path);

/// Parses `x1,x2,...` into doubles; throws ConfigError.
std::vector<double> parse_point(const std::string& text);

}  // namespace stefan::cli

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "commands.hpp"
#include "stefan/errors.hpp"

namespace {

using namespace stefan::cli;

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitConfig = 4;

struct CommonFlags {
  std::optional<std::string> params;
  std::optional<std::string> config;
  std::vector<std::string> sets;
  std::string out_dir = ".";
  std::optional<std::string> order;
  std::optional<std::string> sigma_mode;
  std::optional<std::string> seed;
  std::optional<std::string> paths;
  std::optional<std::string> t_end;
  std::optional<std::string> dt_out;
  std::optional<std::string> threads;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool model_flags, bool stochastic_flags) {
  cmd->add_option("--params", f.params, "params file (key=value)");
  cmd->add_option("--config", f.config, "config file (key=value)");
  cmd->add_option("--set", f.sets, "override one key: key=value")->take_all();
  cmd->add_option("--out-dir", f.out_dir, "directory for all artifacts")->capture_default_str();
  if (model_flags) {
    cmd->add_option("--t-end", f.t_end, "final time");
    cmd->add_option("--dt-out", f.dt_out, "output stride");
    cmd->add_option("--order", f.order, "dynamics order")->check(CLI::IsMember({"deterministic", "1", "2"}));
  }
  if (stochastic_flags) {
    cmd->add_option("--sigma-mode", f.sigma_mode, "noise mass evaluation")->check(CLI::IsMember({"lumped", "shell", "paper"}));
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--paths", f.paths, "ensemble size");
    cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  }
}

ConfigSources sources_from(const CommonFlags& f, stefan::KeyValueMap command_defaults) {
  ConfigSources s;
  s.params_path = f.params;
  s.config_path = f.config;
  s.sets = f.sets;
  s.command_defaults = std::move(command_defaults);
  const auto put = [&](const char* key, const std::optional<std::string>& v) {
    if (v) s.flags[key] = *v;
  };
  put("model.order", f.order);
  put("sigma.mode", f.sigma_mode);
  put("noise.master_seed", f.seed);
  put("mc.paths", f.paths);
  put("time.t_end", f.t_end);
  put("time.output_stride", f.dt_out);
  put("mc.threads", f.threads);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field stochastic Stefan model of order-book spreads"};
  app.require_subcommand(1);

  CommonFlags f;

  auto* ingest = app.add_subcommand("ingest", "calibrate params from quotes and volumes");
  std::string quotes, volumes;
  add_common(ingest, f, false, false);
  ingest->add_option("--quotes", quotes, "quotes CSV")->required();
  ingest->add_option("--volumes", volumes, "volumes CSV")->required();

  auto* simulate = app.add_subcommand("simulate", "integrate one trajectory (deterministic by default)");
  add_common(simulate, f, true, true);

  auto* sde = app.add_subcommand("sde", "integrate one stochastic trajectory (first order by default)");
  add_common(sde, f, true, true);

  auto* mc = app.add_subcommand("mc", "seeded Monte Carlo ensemble");
  bool trajectories = false;
  add_common(mc, f, true, true);
  mc->add_flag("--trajectories", trajectories, "also write one CSV per path");

  auto* scenario = app.add_subcommand("scenario", "second-order ensemble over a horizon in minutes");
  add_common(scenario, f, false, true);

  auto* dens = app.add_subcommand("density", "evaluate the quasi-static density field");
  std::string at;
  double at_time = 0.0;
  add_common(dens, f, false, false);
  dens->add_option("--at", at, "point x1,...,xn")->required();
  dens->add_option("--time", at_time, "time of the deterministic state")->capture_default_str();

  auto* scaling = app.add_subcommand("check-scaling", "report I max R / alpha^(4/9)");
  add_common(scaling, f, false, false);

  auto* ito = app.add_subcommand("ito-check", "quadrature and Monte Carlo checks of the moving-ball formulas");
  add_common(ito, f, false, false);
  ito->add_option("--seed", f.seed, "master seed");
  ito->add_option("--paths", f.paths, "paths for the statistical check");
  ito->add_option("--threads", f.threads, "worker threads (0 = all cores)");

  auto* port = app.add_subcommand("portfolio", "liquidation bookkeeping from asset,s0,p0,f,p");
  std::string portfolio_input;
  add_common(port, f, false, false);
  port->add_option("--input", portfolio_input, "portfolio CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    stefan::KeyValueMap defaults;
    if (sde->parsed() || mc->parsed()) defaults["model.order"] = "1";
    auto sources = sources_from(f, defaults);
    if (ito->parsed() && f.paths) {
      sources.flags.erase("mc.paths");
      sources.flags["ito.paths"] = *f.paths;
    }
    CommandContext ctx{resolve_config(sources), f.out_dir, std::cout};

    if (ingest->parsed()) return cmd_ingest(ctx, quotes, volumes);
    if (simulate->parsed()) return cmd_simulate(ctx);
    if (sde->parsed()) {
      if (dynamics_order(ctx.cfg) == stefan::DynamicsOrder::Deterministic) {
        throw stefan::ConfigError("sde needs --order 1 or 2");
      }
      return cmd_simulate(ctx);
    }
    if (mc->parsed()) return cmd_mc(ctx, trajectories);
    if (scenario->parsed()) return cmd_scenario(ctx);
    if (dens->parsed()) return cmd_density(ctx, parse_point(at), at_time);
    if (scaling->parsed()) return cmd_check_scaling(ctx);
    if (ito->parsed()) return cmd_ito_check(ctx);
    if (port->parsed()) return cmd_portfolio(ctx, portfolio_input);
  } catch (const stefan::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const stefan::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const stefan::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}

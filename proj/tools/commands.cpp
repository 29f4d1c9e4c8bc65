#include "commands.hpp"

#include <fstream>
#include <ostream>

#include "stefan/brownian.hpp"
#include "stefan/errors.hpp"
#include "stefan/portfolio.hpp"
#include "stefan/text_format.hpp"

namespace stefan::cli {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

std::ifstream open_input(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw InputError(std::string("cannot open ") + what + " '" + path + "'");
  return in;
}

void prepare(CommandContext& ctx) {
  std::error_code ec;
  std::filesystem::create_directories(ctx.out_dir, ec);
  if (ec) throw InputError("cannot create output directory '" + ctx.out_dir.string() + "': " + ec.message());
}

void echo_config(CommandContext& ctx) {
  auto out = open_output(ctx.out_dir / "config.resolved");
  write_resolved(out, ctx.cfg);
}

void print_radii(std::ostream& out, const SystemState& s) {
  out << "t=" << format_double(s.t) << " v_inf=" << format_double(s.v_inf) << '\n';
  for (const auto& b : s.balls) {
    out << "R_" << b.index + 1 << '=' << format_double(b.radius());
    if (b.vanished_at) out << " vanished_at=" << format_double(*b.vanished_at);
    out << '\n';
  }
}

}  // namespace

std::vector<double> parse_point(const std::string& text) {
  std::vector<double> x;
  try {
    for (auto part : split(text, ',')) x.push_back(parse_double(trim(part), "coordinate"));
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  return x;
}

int cmd_ingest(CommandContext& ctx, const std::string& quotes_path, const std::string& volumes_path) {
  prepare(ctx);
  auto qin = open_input(quotes_path, "quotes file");
  auto vin = open_input(volumes_path, "volumes file");
  const auto quotes = read_quotes_csv(qin);
  const auto volumes = read_volumes_csv(vin);
  const auto markets = aggregate_markets(quotes, volumes);

  CsRule rule;
  rule.factor = ctx.cfg.number("ingest.cs_factor");
  if (ctx.cfg.values.count("cs")) rule.fixed = ctx.cfg.number("cs");
  const auto params = build_params(markets, rule, ctx.cfg.number("sigma.c0"));

  for (auto& [k, v] : params_to_key_values(params)) ctx.cfg.values[k] = v;
  ctx.cfg.has_params = true;
  {
    auto out = open_output(ctx.out_dir / "params.txt");
    write_params(out, params);
  }
  echo_config(ctx);

  for (const auto& m : markets) {
    for (const auto& a : m.assets) {
      ctx.out << "market " << m.market_id << " asset " << a.asset_id << ": avg_spread=" << format_double(a.avg_spread)
              << " log_spread=" << format_double(a.log_spread) << " center=" << format_double(a.center_coord)
              << " liquidity=" << format_double(a.liquidity) << '\n';
    }
  }
  write_params(ctx.out, params);
  return 0;
}

int cmd_simulate(CommandContext& ctx) {
  prepare(ctx);
  const auto params = market_params(ctx.cfg);
  const auto model = model_spec(ctx.cfg, params);
  const auto icfg = integrator_config(ctx.cfg);
  echo_config(ctx);

  Trajectory traj;
  if (model.order != DynamicsOrder::Deterministic && !model.sigma.is_zero()) {
    const auto path = sample_path(mix_seed(ctx.cfg.seed("noise.master_seed"), 0), ctx.cfg.number("noise.dt"),
                                  icfg.t_end);
    traj = integrate(params, model, icfg, &path);
  } else {
    traj = integrate(params, model, icfg, nullptr);
  }
  {
    auto out = open_output(ctx.out_dir / "trajectory.csv");
    write_trajectory_csv(out, traj);
  }
  ctx.out << "order=" << to_string(model.order) << " steps=" << traj.accepted_steps
          << " rejected=" << traj.rejected_steps << " guard_events=" << traj.guard_event_total << '\n';
  print_radii(ctx.out, traj.terminal());
  return 0;
}

int cmd_mc(CommandContext& ctx, bool write_trajectories) {
  prepare(ctx);
  const auto params = market_params(ctx.cfg);
  const auto model = model_spec(ctx.cfg, params);
  const auto icfg = integrator_config(ctx.cfg);
  auto ens = ensemble_config(ctx.cfg);
  ens.keep_trajectories = write_trajectories;
  echo_config(ctx);

  const auto result = run_ensemble(params, model, icfg, ens);
  {
    auto out = open_output(ctx.out_dir / "summary.txt");
    write_summary(out, result.summary);
  }
  {
    auto out = open_output(ctx.out_dir / "scatter.csv");
    write_scatter_csv(out, result.summary);
  }
  if (write_trajectories) {
    const auto dir = ctx.out_dir / "trajectories";
    std::filesystem::create_directories(dir);
    for (std::size_t k = 0; k < result.trajectories.size(); ++k) {
      if (result.trajectories[k].times.empty()) continue;
      auto out = open_output(dir / ("path_" + std::to_string(k) + ".csv"));
      write_trajectory_csv(out, result.trajectories[k]);
    }
  }
  write_summary(ctx.out, result.summary);
  for (std::size_t i = 0; i < result.summary.failure_messages.size(); ++i) {
    ctx.out << "# failed path " << result.summary.failed_paths[i] << ": " << result.summary.failure_messages[i]
            << '\n';
  }
  return 0;
}

int cmd_scenario(CommandContext& ctx) {
  prepare(ctx);
  const auto params = market_params(ctx.cfg);
  const auto scfg = scenario_config(ctx.cfg);
  echo_config(ctx);

  const auto result = financial_scenario(params, scfg);
  {
    auto out = open_output(ctx.out_dir / "summary.txt");
    write_summary(out, result.ensemble.summary);
  }
  {
    auto out = open_output(ctx.out_dir / "scatter.csv");
    write_scatter_csv(out, result.ensemble.summary);
  }
  auto table = open_output(ctx.out_dir / "checkpoints.csv");
  const std::size_t balls = params.ball_count;
  table << "minute";
  for (std::size_t i = 1; i <= balls; ++i) table << ",R_" << i << "_representative";
  for (std::size_t i = 1; i <= balls; ++i) table << ",R_" << i << "_mean";
  table << '\n';
  for (std::size_t c = 0; c < result.checkpoints_minutes.size(); ++c) {
    table << format_double(result.checkpoints_minutes[c]);
    for (std::size_t i = 0; i < balls; ++i) {
      table << ',' << (result.representative_radii.empty() ? "nan" : format_double(result.representative_radii[c][i]));
    }
    for (std::size_t i = 0; i < balls; ++i) table << ',' << format_double(result.mean_radii[c][i]);
    table << '\n';
  }
  table.close();
  std::ifstream back(ctx.out_dir / "checkpoints.csv");
  ctx.out << back.rdbuf();
  write_summary(ctx.out, result.ensemble.summary);
  return 0;
}

int cmd_density(CommandContext& ctx, const std::vector<double>& at, double t) {
  prepare(ctx);
  const auto params = market_params(ctx.cfg);
  if (at.size() != params.n) {
    throw ConfigError("--at needs " + std::to_string(params.n) + " coordinates, got " + std::to_string(at.size()));
  }
  if (!(t >= 0.0)) throw ConfigError("--time must be >= 0");
  echo_config(ctx);

  SystemState state = initial_state(params);
  if (t > 0.0) {
    ModelSpec model;
    model.order = DynamicsOrder::Deterministic;
    model.alpha = params.alpha;
    model.cs = params.cs;
    auto icfg = integrator_config(ctx.cfg);
    icfg.t_end = t;
    state = integrate(params, model, icfg, nullptr).terminal();
  }
  double value = 0.0;
  try {
    value = density(state, at);
  } catch (const std::domain_error& e) {
    throw InputError(e.what());
  }
  ctx.out << "t=" << format_double(t) << " v_inf=" << format_double(state.v_inf) << '\n';
  ctx.out << "density=" << format_double(value) << '\n';
  return 0;
}

int cmd_check_scaling(CommandContext& ctx) {
  prepare(ctx);
  const auto params = market_params(ctx.cfg);
  echo_config(ctx);
  const auto report = check_scaling(params, ctx.cfg.number("scaling.rho_max"));
  ctx.out << "rho=" << format_double(report.rho) << '\n';
  ctx.out << "rho_max=" << format_double(report.rho_max) << '\n';
  ctx.out << "status=" << (report.pass ? "pass" : "warn") << '\n';
  return 0;
}

int cmd_ito_check(CommandContext& ctx) {
  prepare(ctx);
  const auto icfg = ito_config(ctx.cfg);
  echo_config(ctx);
  const auto report = run_ito_suite(icfg);
  {
    auto out = open_output(ctx.out_dir / "ito_report.csv");
    write_ito_report(out, report);
  }
  write_ito_report(ctx.out, report);
  return 0;
}

int cmd_portfolio(CommandContext& ctx, const std::string& input_path) {
  prepare(ctx);
  auto in = open_input(input_path, "portfolio file");
  const auto report = evaluate_portfolio(read_portfolio_csv(in));
  echo_config(ctx);
  {
    auto out = open_output(ctx.out_dir / "portfolio.csv");
    write_portfolio_report(out, report);
  }
  write_portfolio_report(ctx.out, report);
  return 0;
}

}  // namespace stefan::cli

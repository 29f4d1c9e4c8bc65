#include "stefan/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "stefan/brownian.hpp"
#include "stefan/errors.hpp"
#include "stefan/parallel.hpp"
#include "stefan/text_format.hpp"

namespace stefan {

namespace {

struct PathOutcome {
  bool failed = false;
  std::string message;
  std::vector<double> terminal;
  std::vector<unsigned char> vanished;
  Trajectory trajectory;
};

}  // namespace

EnsembleResult run_ensemble(const MarketParams& params, const ModelSpec& model, const IntegratorConfig& cfg,
                            const EnsembleConfig& ensemble) {
  if (ensemble.n_paths == 0) throw ConfigError("mc.paths must be >= 1");
  if (!(ensemble.noise_dt > 0.0)) throw ConfigError("noise.dt must be > 0");
  params.validate();
  model.validate();
  cfg.validate();

  const bool noisy = model.order != DynamicsOrder::Deterministic && !model.sigma.is_zero();
  std::vector<PathOutcome> outcomes(ensemble.n_paths);

  parallel_for(ensemble.n_paths, ensemble.threads, [&](std::size_t k) {
    auto& out = outcomes[k];
    try {
      Trajectory traj;
      if (noisy) {
        const auto path = sample_path(mix_seed(ensemble.master_seed, k), ensemble.noise_dt, cfg.t_end);
        traj = integrate(params, model, cfg, &path);
      } else {
        traj = integrate(params, model, cfg, nullptr);
      }
      const auto& last = traj.terminal();
      out.terminal = last.radii();
      for (const auto& b : last.balls) out.vanished.push_back(b.active() ? 0 : 1);
      if (ensemble.keep_trajectories) out.trajectory = std::move(traj);
    } catch (const NumericalError& e) {
      out.failed = true;
      out.message = e.what();
    }
  });

  EnsembleResult result;
  auto& s = result.summary;
  s.n_paths = ensemble.n_paths;
  s.master_seed = ensemble.master_seed;
  s.order = model.order;
  s.terminal_time = cfg.t_end;
  s.balls.assign(params.ball_count, BallSummary{});

  std::vector<std::vector<double>> per_ball(params.ball_count);
  std::vector<std::size_t> vanish_counts(params.ball_count, 0);
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    auto& out = outcomes[k];
    if (out.failed) {
      s.failed_paths.push_back(k);
      s.failure_messages.push_back(out.message);
      s.terminal_radii.emplace_back();
      s.vanished.emplace_back();
    } else {
      for (std::size_t i = 0; i < params.ball_count; ++i) {
        per_ball[i].push_back(out.terminal[i]);
        vanish_counts[i] += out.vanished[i];
      }
      s.terminal_radii.push_back(std::move(out.terminal));
      s.vanished.push_back(std::move(out.vanished));
    }
    if (ensemble.keep_trajectories) result.trajectories.push_back(std::move(out.trajectory));
  }

  for (std::size_t i = 0; i < params.ball_count; ++i) {
    const auto& xs = per_ball[i];
    auto& b = s.balls[i];
    if (xs.empty()) {
      b.mean = b.std = b.min = b.max = std::nan("");
      continue;
    }
    double sum = 0.0;
    for (double x : xs) sum += x;
    b.mean = sum / static_cast<double>(xs.size());
    double sq = 0.0;
    for (double x : xs) sq += (x - b.mean) * (x - b.mean);
    b.std = xs.size() > 1 ? std::sqrt(sq / static_cast<double>(xs.size() - 1)) : 0.0;
    b.min = *std::min_element(xs.begin(), xs.end());
    b.max = *std::max_element(xs.begin(), xs.end());
    b.vanish_fraction = static_cast<double>(vanish_counts[i]) / static_cast<double>(xs.size());
  }
  return result;
}

KeyValueList summary_to_key_values(const MCSummary& summary) {
  KeyValueList kv;
  kv.emplace_back("n_paths", std::to_string(summary.n_paths));
  kv.emplace_back("master_seed", std::to_string(summary.master_seed));
  kv.emplace_back("order", to_string(summary.order));
  kv.emplace_back("terminal_time", format_double(summary.terminal_time));
  kv.emplace_back("failed_paths", std::to_string(summary.failed_paths.size()));
  kv.emplace_back("valid", summary.valid() ? "true" : "false");
  for (std::size_t i = 0; i < summary.balls.size(); ++i) {
    const auto prefix = "ball." + std::to_string(i + 1) + ".";
    const auto& b = summary.balls[i];
    kv.emplace_back(prefix + "mean", format_double(b.mean));
    kv.emplace_back(prefix + "std", format_double(b.std));
    kv.emplace_back(prefix + "min", format_double(b.min));
    kv.emplace_back(prefix + "max", format_double(b.max));
    kv.emplace_back(prefix + "vanish_fraction", format_double(b.vanish_fraction));
  }
  return kv;
}

void write_summary(std::ostream& out, const MCSummary& summary) { write_key_values(out, summary_to_key_values(summary)); }

void write_scatter_csv(std::ostream& out, const MCSummary& summary) {
  const std::size_t balls = summary.balls.size();
  out << "path";
  for (std::size_t i = 1; i <= balls; ++i) out << ",R_" << i << "_terminal";
  for (std::size_t i = 1; i <= balls; ++i) out << ",vanished_" << i;
  out << '\n';
  for (std::size_t k = 0; k < summary.terminal_radii.size(); ++k) {
    const auto& radii = summary.terminal_radii[k];
    out << k;
    // Failed paths keep their row so the row count always equals n_paths.
    for (std::size_t i = 0; i < balls; ++i) out << ',' << (radii.empty() ? "nan" : format_double(radii[i]));
    for (std::size_t i = 0; i < balls; ++i) {
      out << ',' << (radii.empty() ? "nan" : std::to_string(summary.vanished[k][i]));
    }
    out << '\n';
  }
}

std::vector<double> radii_at(const Trajectory& trajectory, double t) {
  const auto& times = trajectory.times;
  if (times.empty()) throw InputError("empty trajectory");
  if (t <= times.front()) return trajectory.states.front().radii();
  if (t >= times.back()) return trajectory.states.back().radii();
  const auto hi = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
  const std::size_t lo = hi - 1;
  const auto a = trajectory.states[lo].radii();
  if (times[lo] == t) return a;
  const auto b = trajectory.states[hi].radii();
  const double w = (t - times[lo]) / (times[hi] - times[lo]);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (1.0 - w) * a[i] + w * b[i];
  return out;
}

std::vector<double> ensemble_mean_radii(const EnsembleResult& result, double t) {
  std::vector<double> sum;
  std::size_t count = 0;
  for (const auto& traj : result.trajectories) {
    if (traj.times.empty()) continue;
    const auto r = radii_at(traj, t);
    if (sum.empty()) sum.assign(r.size(), 0.0);
    for (std::size_t i = 0; i < r.size(); ++i) sum[i] += r[i];
    ++count;
  }
  if (count == 0) throw InputError("ensemble holds no trajectories");
  for (double& x : sum) x /= static_cast<double>(count);
  return sum;
}

FinancialScenarioResult financial_scenario(const MarketParams& params, const FinancialScenarioConfig& cfg) {
  if (!(cfg.minutes_per_unit > 0.0)) throw ConfigError("time.minutes_per_unit must be > 0");
  if (!(cfg.horizon_minutes > 0.0)) throw ConfigError("scenario horizon must be > 0");

  MarketParams p = params;
  p.cs = cfg.cs;

  ModelSpec model;
  model.order = DynamicsOrder::Stochastic2;
  model.alpha = p.alpha;
  model.cs = p.cs;
  model.sigma = cfg.sigma;
  model.sigma_mode = cfg.sigma_mode;

  IntegratorConfig icfg = cfg.integrator;
  icfg.t_end = cfg.horizon_minutes / cfg.minutes_per_unit;
  for (double m : cfg.checkpoints_minutes) icfg.extra_output_times.push_back(m / cfg.minutes_per_unit);

  EnsembleConfig ens;
  ens.n_paths = cfg.n_paths;
  ens.master_seed = cfg.master_seed;
  ens.noise_dt = cfg.noise_dt;
  ens.threads = cfg.threads;
  ens.keep_trajectories = true;

  FinancialScenarioResult out;
  out.ensemble = run_ensemble(p, model, icfg, ens);
  out.checkpoints_minutes = cfg.checkpoints_minutes;
  const Trajectory* representative = nullptr;
  for (const auto& traj : out.ensemble.trajectories) {
    if (!traj.times.empty()) {
      representative = &traj;
      break;
    }
  }
  for (double m : cfg.checkpoints_minutes) {
    const double t = m / cfg.minutes_per_unit;
    if (representative != nullptr) out.representative_radii.push_back(radii_at(*representative, t));
    out.mean_radii.push_back(ensemble_mean_radii(out.ensemble, t));
  }
  return out;
}

}  // namespace stefan

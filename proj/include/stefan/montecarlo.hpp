#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stefan/dynamics.hpp"
#include "stefan/integrator.hpp"
#include "stefan/lob_ingest.hpp"
#include "stefan/params_io.hpp"

namespace stefan {

struct EnsembleConfig {
  std::size_t n_paths = 100;
  std::uint64_t master_seed = 0;
  double noise_dt = 1e-4;
  std::size_t threads = 0;  // 0 = hardware concurrency
  bool keep_trajectories = true;
};

struct BallSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
  double min = 0.0;
  double max = 0.0;
  double vanish_fraction = 0.0;
};

struct MCSummary {
  std::size_t n_paths = 0;
  std::uint64_t master_seed = 0;
  DynamicsOrder order = DynamicsOrder::Deterministic;
  double terminal_time = 0.0;
  std::vector<BallSummary> balls;
  std::vector<std::vector<double>> terminal_radii;  // [path][ball]; empty row for failed paths
  std::vector<std::vector<unsigned char>> vanished;  // [path][ball]
  std::vector<std::size_t> failed_paths;
  std::vector<std::string> failure_messages;

  std::size_t valid_paths() const { return n_paths - failed_paths.size(); }
  /// More than 1% of the paths failed.
  bool valid() const { return failed_paths.size() * 100 <= n_paths; }
};

struct EnsembleResult {
  MCSummary summary;
  std::vector<Trajectory> trajectories;  // index = path; empty for failed paths
};

/// Path k integrates against sample_path(mix_seed(master_seed, k), noise_dt, t_end).
/// Results do not depend on the thread count or on scheduling order. A path that
/// throws NumericalError is flagged and excluded from the statistics.
EnsembleResult run_ensemble(const MarketParams& params, const ModelSpec& model, const IntegratorConfig& cfg,
                            const EnsembleConfig& ensemble);

/// `key=value` lines: n_paths, master_seed, order, terminal_time, failed_paths,
/// valid, then ball.<i>.{mean,std,min,max,vanish_fraction}.
KeyValueList summary_to_key_values(const MCSummary& summary);
void write_summary(std::ostream& out, const MCSummary& summary);

/// `path,R_1_terminal,...,R_I_terminal,vanished_1,...,vanished_I`, one row per path.
void write_scatter_csv(std::ostream& out, const MCSummary& summary);

/// Mean radius of each ball across valid paths at output time `t` (nearest
/// recorded sample, linear interpolation between samples).
std::vector<double> ensemble_mean_radii(const EnsembleResult& result, double t);

/// Radius of every ball at time t along one trajectory, linearly interpolated.
std::vector<double> radii_at(const Trajectory& trajectory, double t);

struct FinancialScenarioConfig {
  std::size_t n_paths = 300;
  std::uint64_t master_seed = 2019;
  double noise_dt = 1e-4;
  double minutes_per_unit = 1.0;
  double horizon_minutes = 8.0;
  double cs = 5e4 * 5.731192468848986;
  std::vector<double> checkpoints_minutes = {0.0, 2.0, 7.079646017699115, 8.0};
  std::size_t threads = 0;
  SigmaProfile sigma = SigmaProfile::compact(1.0, 1.0);
  SigmaMode sigma_mode = SigmaMode::LumpedMass;
  IntegratorConfig integrator;
};

struct FinancialScenarioResult {
  EnsembleResult ensemble;
  std::vector<double> checkpoints_minutes;
  std::vector<std::vector<double>> representative_radii;  // first valid path, [checkpoint][ball]
  std::vector<std::vector<double>> mean_radii;            // [checkpoint][ball]
};

/// Second-order stochastic system on calibrated order-book parameters over a
/// horizon in minutes; cs from the config overrides params.cs.
FinancialScenarioResult financial_scenario(const MarketParams& params, const FinancialScenarioConfig& cfg);

}  // namespace stefan

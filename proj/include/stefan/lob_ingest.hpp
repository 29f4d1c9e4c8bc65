#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace stefan {

/// One top-of-book observation for one asset in one market.
struct QuoteSample {
  int market_id = 1;
  int asset_id = 1;
  double time = 0.0;  // minutes
  double ask = 0.0;
  double bid = 0.0;
};

/// Executed share count for one asset over the sampling window.
///
/// Treated as the combined sell+buy total: the per-asset definition speaks of
/// sell orders only, while the total over assets is described as sell and buy
/// orders. The calibration formulas are identical either way.
struct ExecutedVolume {
  int market_id = 1;
  int asset_id = 1;
  double shares = 0.0;
};

struct AssetAggregate {
  int asset_id = 0;
  std::size_t samples = 0;
  double sum_ask = 0.0;
  double sum_bid = 0.0;
  double avg_spread = 0.0;    // sum(A - B) / m
  double log_spread = 0.0;    // ln(sum A) - ln(sum B)
  double center_coord = 0.0;  // ln of the averaged mid price
  double volume = 0.0;
  double liquidity = 0.0;     // volume / avg_spread
};

struct MarketAggregates {
  int market_id = 0;
  std::vector<AssetAggregate> assets;  // sorted by asset_id
};

/// Calibrated model inputs. One ball per market; centers live in log-price space.
struct MarketParams {
  std::size_t n = 0;
  std::size_t ball_count = 0;
  double alpha = 0.0;
  double alpha_in = 0.0;
  std::vector<std::vector<double>> centers;
  std::vector<double> radii0;
  double v_inf0 = 0.0;
  double c0 = 0.0;
  double cs = 0.0;

  double omega_volume() const { return cs * cs * cs; }

  /// Throws InputError if any documented invariant is violated.
  void validate() const;
};

struct LiquidityCoefficients {
  double alpha_in = 0.0;
  double alpha = 0.0;
};

/// Domain scale selection. `fixed` wins over the default rule
/// cs = factor * max(alpha^(4/9), largest center norm).
struct CsRule {
  std::optional<double> fixed;
  double factor = 10.0;
};

struct ScalingReport {
  double rho = 0.0;
  double rho_max = 0.1;
  bool pass = true;
};

double mid_price(double ask, double bid);
double spread(double ask, double bid);

AssetAggregate aggregate_asset(std::span<const QuoteSample> samples, const ExecutedVolume& volume);

LiquidityCoefficients liquidity_alpha(std::span<const AssetAggregate> aggregates);

/// Groups quotes per (market, asset), checks stream ordering and that every
/// market carries the same asset set, and attaches the matching volume record.
std::vector<MarketAggregates> aggregate_markets(std::span<const QuoteSample> quotes,
                                                std::span<const ExecutedVolume> volumes);

MarketParams build_params(std::span<const MarketAggregates> markets, const CsRule& cs_rule,
                          double sigma_c0);

double default_domain_scale(double alpha, std::span<const std::vector<double>> centers,
                            double factor = 10.0);

ScalingReport check_scaling(const MarketParams& params, double rho_max = 0.1);

/// Header `market,asset,time,ask,bid`; time is `HH:MM` or integer minutes and is
/// rebased to minutes since the first sample in the file.
std::vector<QuoteSample> read_quotes_csv(std::istream& in);

/// Header `market,asset,shares`.
std::vector<ExecutedVolume> read_volumes_csv(std::istream& in);

}  // namespace stefan

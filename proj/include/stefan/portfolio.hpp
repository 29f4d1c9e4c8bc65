#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace stefan {

// Liquidation bookkeeping for a portfolio of n assets. Prices are supplied by
// the caller; nothing here predicts them.

struct Holdings {
  std::vector<double> s0;  // initial share counts, >= 0
  std::vector<double> p0;  // initial prices, > 0

  void validate() const;
};

/// Remaining shares s_i = (1 - f_i) s0_i. Requires 0 <= f_i <= 1.
std::vector<double> allocation(const Holdings& h, std::span<const double> f);

/// sum_i s_i p_i. Throws InputError on negative shares or non-positive prices.
double value(std::span<const double> shares, std::span<const double> prices);

/// Cash raised by liquidation: sum_i f_i s0_i p_i.
double consumption(const Holdings& h, std::span<const double> f, std::span<const double> prices);

/// s_i / sum_j s_j. Throws InputError when every share count is zero.
std::vector<double> weights(std::span<const double> shares);

/// sum_i z_i p_i / p0_i with z the weights of the post-liquidation shares.
double rate_of_return(const Holdings& h, std::span<const double> f, std::span<const double> prices);

struct PortfolioRow {
  std::string asset;
  double s0 = 0.0;
  double p0 = 0.0;
  double f = 0.0;
  double p = 0.0;
};

/// Header `asset,s0,p0,f,p`.
std::vector<PortfolioRow> read_portfolio_csv(std::istream& in);

struct PortfolioReport {
  std::vector<std::string> assets;
  std::vector<double> allocation;
  std::vector<double> weights;
  double initial_value = 0.0;  // value(s0, p)
  double remaining_value = 0.0;
  double consumption = 0.0;
  double rate_of_return = 0.0;
};

PortfolioReport evaluate_portfolio(const std::vector<PortfolioRow>& rows);
void write_portfolio_report(std::ostream& out, const PortfolioReport& report);

}  // namespace stefan

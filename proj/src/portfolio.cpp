#include "stefan/portfolio.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "stefan/errors.hpp"
#include "stefan/text_format.hpp"

namespace stefan {

namespace {

void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) throw InputError("vector lengths differ (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
}

void require_fractions(std::span<const double> f) {
  for (double x : f) {
    if (!(x >= 0.0 && x <= 1.0)) throw InputError("liquidation fraction " + format_double(x) + " outside [0,1]");
  }
}

void require_prices(std::span<const double> p) {
  for (double x : p) {
    if (!(x > 0.0) || !std::isfinite(x)) throw InputError("price must be > 0, got " + format_double(x));
  }
}

}  // namespace

void Holdings::validate() const {
  require_same_length(s0.size(), p0.size());
  for (double s : s0) {
    if (!(s >= 0.0)) throw InputError("share count must be >= 0, got " + format_double(s));
  }
  require_prices(p0);
}

std::vector<double> allocation(const Holdings& h, std::span<const double> f) {
  h.validate();
  require_same_length(h.s0.size(), f.size());
  require_fractions(f);
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = (1.0 - f[i]) * h.s0[i];
  return out;
}

double value(std::span<const double> shares, std::span<const double> prices) {
  require_same_length(shares.size(), prices.size());
  require_prices(prices);
  double sum = 0.0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    if (!(shares[i] >= 0.0)) throw InputError("share count must be >= 0, got " + format_double(shares[i]));
    sum += shares[i] * prices[i];
  }
  return sum;
}

double consumption(const Holdings& h, std::span<const double> f, std::span<const double> prices) {
  h.validate();
  require_same_length(h.s0.size(), f.size());
  require_same_length(h.s0.size(), prices.size());
  require_fractions(f);
  require_prices(prices);
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * h.s0[i] * prices[i];
  return sum;
}

std::vector<double> weights(std::span<const double> shares) {
  double total = 0.0;
  for (double s : shares) {
    if (!(s >= 0.0)) throw InputError("share count must be >= 0, got " + format_double(s));
    total += s;
  }
  if (!(total > 0.0)) throw InputError("weights undefined: all share counts are zero");
  std::vector<double> out(shares.size());
  for (std::size_t i = 0; i < shares.size(); ++i) out[i] = shares[i] / total;
  return out;
}

double rate_of_return(const Holdings& h, std::span<const double> f, std::span<const double> prices) {
  require_same_length(h.s0.size(), prices.size());
  require_prices(prices);
  const auto z = weights(allocation(h, f));
  double r = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) r += z[i] * prices[i] / h.p0[i];
  return r;
}

std::vector<PortfolioRow> read_portfolio_csv(std::istream& in) {
  std::vector<PortfolioRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::vector<std::string> fields;
    for (auto part : split(body, ',')) fields.emplace_back(trim(part));
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (!header) {
      if (fields != std::vector<std::string>{"asset", "s0", "p0", "f", "p"}) {
        throw InputError(where + "expected header 'asset,s0,p0,f,p'");
      }
      header = true;
      continue;
    }
    if (fields.size() != 5) throw InputError(where + "expected 5 fields, got " + std::to_string(fields.size()));
    try {
      PortfolioRow r;
      r.asset = fields[0];
      r.s0 = parse_double(fields[1], "s0");
      r.p0 = parse_double(fields[2], "p0");
      r.f = parse_double(fields[3], "f");
      r.p = parse_double(fields[4], "p");
      if (!(r.s0 >= 0.0)) throw InputError("s0 must be >= 0");
      if (!(r.p0 > 0.0) || !(r.p > 0.0)) throw InputError("prices must be > 0");
      if (!(r.f >= 0.0 && r.f <= 1.0)) throw InputError("f must lie in [0,1]");
      rows.push_back(std::move(r));
    } catch (const InputError& e) {
      throw InputError(where + e.what());
    }
  }
  if (!header) throw InputError("missing header line");
  if (rows.empty()) throw InputError("no assets");
  return rows;
}

PortfolioReport evaluate_portfolio(const std::vector<PortfolioRow>& rows) {
  Holdings h;
  std::vector<double> f, p;
  PortfolioReport out;
  for (const auto& r : rows) {
    out.assets.push_back(r.asset);
    h.s0.push_back(r.s0);
    h.p0.push_back(r.p0);
    f.push_back(r.f);
    p.push_back(r.p);
  }
  out.allocation = allocation(h, f);
  out.initial_value = value(h.s0, p);
  out.remaining_value = value(out.allocation, p);
  out.consumption = consumption(h, f, p);
  out.weights = weights(out.allocation);
  out.rate_of_return = rate_of_return(h, f, p);
  return out;
}

void write_portfolio_report(std::ostream& out, const PortfolioReport& report) {
  out << "asset,allocation,weight\n";
  for (std::size_t i = 0; i < report.assets.size(); ++i) {
    out << report.assets[i] << ',' << format_double(report.allocation[i]) << ','
        << format_double(report.weights[i]) << '\n';
  }
  out << "# initial_value=" << format_double(report.initial_value) << '\n';
  out << "# remaining_value=" << format_double(report.remaining_value) << '\n';
  out << "# consumption=" << format_double(report.consumption) << '\n';
  out << "# rate_of_return=" << format_double(report.rate_of_return) << '\n';
}

}  // namespace stefan

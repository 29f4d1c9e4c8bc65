#include "stefan/lob_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <string>
#include <utility>

#include "stefan/errors.hpp"
#include "stefan/text_format.hpp"

namespace stefan {

namespace {

void require_quote(double ask, double bid) {
  if (!(bid > 0.0) || !(ask > bid) || !std::isfinite(ask)) {
    throw InputError("invalid quote: need ask > bid > 0, got ask=" + format_double(ask) +
                     " bid=" + format_double(bid));
  }
}

std::string line_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

// Reads the header and the data rows of a small CSV; returns (line number, fields).
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_rows(
    std::istream& in, const std::vector<std::string>& expected_header) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::vector<std::string> fields;
    for (auto part : split(body, ',')) fields.emplace_back(trim(part));
    if (!header_seen) {
      if (fields != expected_header) {
        std::string want;
        for (const auto& h : expected_header) want += (want.empty() ? "" : ",") + h;
        throw InputError(line_prefix(line_no) + "expected header '" + want + "'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != expected_header.size()) {
      throw InputError(line_prefix(line_no) + "expected " + std::to_string(expected_header.size()) +
                       " fields, got " + std::to_string(fields.size()));
    }
    rows.emplace_back(line_no, std::move(fields));
  }
  if (!header_seen) throw InputError("missing header line");
  return rows;
}

double parse_clock(const std::string& text, std::string_view what) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) return static_cast<double>(parse_integer(text, what));
  const auto hours = parse_integer(std::string_view(text).substr(0, colon), what);
  const auto minutes = parse_integer(std::string_view(text).substr(colon + 1), what);
  if (hours < 0 || minutes < 0 || minutes >= 60) {
    throw InputError("invalid clock time for " + std::string(what) + ": '" + text + "'");
  }
  return static_cast<double>(hours * 60 + minutes);
}

}  // namespace

void MarketParams::validate() const {
  if (ball_count == 0 || radii0.size() != ball_count || centers.size() != ball_count) {
    throw InputError("params: ball count does not match centers/radii");
  }
  for (std::size_t i = 0; i < ball_count; ++i) {
    if (!(radii0[i] > 0.0)) throw InputError("params: radius0." + std::to_string(i + 1) + " must be > 0");
    if (centers[i].size() != n) {
      throw InputError("params: center." + std::to_string(i + 1) + " has wrong dimension");
    }
  }
  if (!(alpha > 0.0)) throw InputError("params: alpha must be > 0");
  if (!(v_inf0 > 0.0)) throw InputError("params: v_inf0 must be > 0");
  if (!(c0 >= 0.0)) throw InputError("params: c0 must be >= 0");
  if (!(cs > 0.0)) throw InputError("params: cs must be > 0");
}

double mid_price(double ask, double bid) {
  require_quote(ask, bid);
  return 0.5 * (ask + bid);
}

double spread(double ask, double bid) {
  require_quote(ask, bid);
  return ask - bid;
}

AssetAggregate aggregate_asset(std::span<const QuoteSample> samples, const ExecutedVolume& volume) {
  if (samples.empty()) throw InputError("no samples");
  if (!(volume.shares >= 0.0)) throw InputError("executed volume must be >= 0");

  AssetAggregate agg;
  agg.asset_id = samples.front().asset_id;
  agg.samples = samples.size();
  double sum_spread = 0.0;
  double sum_mid2 = 0.0;  // sum of (A + B)
  for (const auto& q : samples) {
    require_quote(q.ask, q.bid);
    agg.sum_ask += q.ask;
    agg.sum_bid += q.bid;
    sum_spread += q.ask - q.bid;
    sum_mid2 += q.ask + q.bid;
  }
  const double m = static_cast<double>(samples.size());
  agg.avg_spread = sum_spread / m;
  agg.log_spread = std::log(agg.sum_ask) - std::log(agg.sum_bid);
  agg.center_coord = std::log(sum_mid2 / (2.0 * m));
  agg.volume = volume.shares;
  agg.liquidity = volume.shares / agg.avg_spread;
  return agg;
}

LiquidityCoefficients liquidity_alpha(std::span<const AssetAggregate> aggregates) {
  double w_tot = 0.0;
  for (const auto& a : aggregates) {
    if (!(a.volume >= 0.0)) throw InputError("executed volume must be >= 0");
    if (!(a.avg_spread > 0.0) || !(a.log_spread > 0.0)) {
      throw InputError("asset " + std::to_string(a.asset_id) + " has zero spread");
    }
    w_tot += a.volume;
  }
  if (!(w_tot > 0.0)) throw InputError("total executed volume is zero");

  LiquidityCoefficients out;
  for (const auto& a : aggregates) {
    const double w2 = a.volume * a.volume;
    out.alpha_in += w2 / (a.avg_spread * w_tot);
    out.alpha += w2 / (a.log_spread * w_tot);
  }
  return out;
}

std::vector<MarketAggregates> aggregate_markets(std::span<const QuoteSample> quotes,
                                                std::span<const ExecutedVolume> volumes) {
  if (quotes.empty()) throw InputError("no samples");

  std::map<std::pair<int, int>, std::vector<QuoteSample>> streams;
  for (const auto& q : quotes) {
    auto& stream = streams[{q.market_id, q.asset_id}];
    if (!stream.empty() && !(q.time > stream.back().time)) {
      throw InputError("timestamps must strictly increase within market " + std::to_string(q.market_id) +
                       ", asset " + std::to_string(q.asset_id));
    }
    stream.push_back(q);
  }

  std::map<std::pair<int, int>, ExecutedVolume> by_key;
  for (const auto& v : volumes) {
    if (!by_key.emplace(std::make_pair(v.market_id, v.asset_id), v).second) {
      throw InputError("duplicate volume record for market " + std::to_string(v.market_id) + ", asset " +
                       std::to_string(v.asset_id));
    }
  }

  std::map<int, MarketAggregates> markets;
  for (const auto& [key, samples] : streams) {
    const auto vol = by_key.find(key);
    if (vol == by_key.end()) {
      throw InputError("missing volume record for market " + std::to_string(key.first) + ", asset " +
                       std::to_string(key.second));
    }
    auto& market = markets[key.first];
    market.market_id = key.first;
    market.assets.push_back(aggregate_asset(samples, vol->second));
  }

  std::vector<MarketAggregates> out;
  for (auto& [id, market] : markets) out.push_back(std::move(market));

  const auto asset_ids = [](const MarketAggregates& m) {
    std::vector<int> ids;
    for (const auto& a : m.assets) ids.push_back(a.asset_id);
    return ids;
  };
  const auto reference = asset_ids(out.front());
  for (const auto& m : out) {
    if (asset_ids(m) != reference) {
      throw InputError("market " + std::to_string(m.market_id) + " has a different asset set than market " +
                       std::to_string(out.front().market_id));
    }
  }
  return out;
}

double default_domain_scale(double alpha, std::span<const std::vector<double>> centers, double factor) {
  double largest = 0.0;
  for (const auto& c : centers) {
    double sq = 0.0;
    for (double x : c) sq += x * x;
    largest = std::max(largest, std::sqrt(sq));
  }
  return factor * std::max(std::pow(alpha, 4.0 / 9.0), largest);
}

MarketParams build_params(std::span<const MarketAggregates> markets, const CsRule& cs_rule, double sigma_c0) {
  if (markets.empty()) throw InputError("no markets");
  MarketParams p;
  p.n = markets.front().assets.size();
  if (p.n == 0) throw InputError("no assets");
  p.ball_count = markets.size();

  double sum_radii = 0.0;
  for (const auto& m : markets) {
    if (m.assets.size() != p.n) throw InputError("inconsistent asset sets across markets");
    for (std::size_t k = 0; k < p.n; ++k) {
      if (m.assets[k].asset_id != markets.front().assets[k].asset_id) {
        throw InputError("inconsistent asset sets across markets");
      }
    }
    std::vector<double> center;
    double min_log_spread = m.assets.front().log_spread;
    for (const auto& a : m.assets) {
      center.push_back(a.center_coord);
      min_log_spread = std::min(min_log_spread, a.log_spread);
    }
    const auto coeffs = liquidity_alpha(m.assets);
    p.alpha += coeffs.alpha;
    p.alpha_in += coeffs.alpha_in;
    p.centers.push_back(std::move(center));
    p.radii0.push_back(0.5 * min_log_spread);
    sum_radii += 0.5 * min_log_spread;
  }
  const double count = static_cast<double>(p.ball_count);
  p.alpha /= count;
  p.alpha_in /= count;
  p.v_inf0 = count / sum_radii;
  p.c0 = sigma_c0;
  p.cs = cs_rule.fixed ? *cs_rule.fixed : default_domain_scale(p.alpha, p.centers, cs_rule.factor);
  p.validate();
  return p;
}

ScalingReport check_scaling(const MarketParams& params, double rho_max) {
  const double r_max = params.radii0.empty() ? 0.0 : *std::max_element(params.radii0.begin(), params.radii0.end());
  ScalingReport report;
  report.rho_max = rho_max;
  report.rho = static_cast<double>(params.ball_count) * r_max / std::pow(params.alpha, 4.0 / 9.0);
  report.pass = report.rho <= rho_max;
  return report;
}

std::vector<QuoteSample> read_quotes_csv(std::istream& in) {
  const auto rows = read_rows(in, {"market", "asset", "time", "ask", "bid"});
  if (rows.empty()) throw InputError("no samples");
  std::vector<QuoteSample> out;
  out.reserve(rows.size());
  for (const auto& [line, f] : rows) {
    try {
      QuoteSample q;
      q.market_id = static_cast<int>(parse_integer(f[0], "market"));
      q.asset_id = static_cast<int>(parse_integer(f[1], "asset"));
      q.time = parse_clock(f[2], "time");
      q.ask = parse_double(f[3], "ask");
      q.bid = parse_double(f[4], "bid");
      if (q.market_id < 1 || q.asset_id < 1) throw InputError("market and asset ids must be >= 1");
      require_quote(q.ask, q.bid);
      out.push_back(q);
    } catch (const InputError& e) {
      throw InputError(line_prefix(line) + e.what());
    }
  }
  const double t0 = out.front().time;
  for (auto& q : out) q.time -= t0;
  return out;
}

std::vector<ExecutedVolume> read_volumes_csv(std::istream& in) {
  const auto rows = read_rows(in, {"market", "asset", "shares"});
  std::vector<ExecutedVolume> out;
  for (const auto& [line, f] : rows) {
    try {
      ExecutedVolume v;
      v.market_id = static_cast<int>(parse_integer(f[0], "market"));
      v.asset_id = static_cast<int>(parse_integer(f[1], "asset"));
      v.shares = parse_double(f[2], "shares");
      if (!(v.shares >= 0.0)) throw InputError("shares must be >= 0");
      out.push_back(v);
    } catch (const InputError& e) {
      throw InputError(line_prefix(line) + e.what());
    }
  }
  return out;
}

}  // namespace stefan

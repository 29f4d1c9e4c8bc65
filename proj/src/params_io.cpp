#include "stefan/params_io.hpp"

#include <istream>
#include <ostream>
#include <string>

#include "stefan/errors.hpp"
#include "stefan/text_format.hpp"

namespace stefan {

namespace {

const std::string& require(const KeyValueMap& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw InputError("params: missing key '" + key + "'");
  return it->second;
}

bool has_indexed_prefix(const std::string& key, const std::string& prefix) {
  if (key.rfind(prefix, 0) != 0 || key.size() == prefix.size()) return false;
  for (std::size_t i = prefix.size(); i < key.size(); ++i) {
    if (key[i] < '0' || key[i] > '9') return false;
  }
  return true;
}

}  // namespace

KeyValueMap read_key_values(std::istream& in) {
  KeyValueMap kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw InputError("line " + std::to_string(line_no) + ": expected key=value");
    }
    std::string key(trim(body.substr(0, eq)));
    std::string value(trim(body.substr(eq + 1)));
    if (key.empty()) throw InputError("line " + std::to_string(line_no) + ": empty key");
    if (!kv.emplace(key, value).second) {
      throw InputError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

void write_key_values(std::ostream& out, const KeyValueList& entries) {
  for (const auto& [k, v] : entries) out << k << '=' << v << '\n';
}

KeyValueList params_to_key_values(const MarketParams& p) {
  KeyValueList kv;
  kv.emplace_back("n", std::to_string(p.n));
  kv.emplace_back("I", std::to_string(p.ball_count));
  kv.emplace_back("alpha", format_double(p.alpha));
  kv.emplace_back("alpha_in", format_double(p.alpha_in));
  kv.emplace_back("v_inf0", format_double(p.v_inf0));
  kv.emplace_back("c0", format_double(p.c0));
  kv.emplace_back("cs", format_double(p.cs));
  for (std::size_t i = 0; i < p.ball_count; ++i) {
    std::string coords;
    for (std::size_t k = 0; k < p.centers[i].size(); ++k) {
      if (k) coords += ',';
      coords += format_double(p.centers[i][k]);
    }
    kv.emplace_back("center." + std::to_string(i + 1), coords);
  }
  for (std::size_t i = 0; i < p.ball_count; ++i) {
    kv.emplace_back("radius0." + std::to_string(i + 1), format_double(p.radii0[i]));
  }
  return kv;
}

bool is_params_key(const std::string& key) {
  static const char* plain[] = {"n", "I", "alpha", "alpha_in", "v_inf0", "c0", "cs"};
  for (const char* k : plain) {
    if (key == k) return true;
  }
  return has_indexed_prefix(key, "center.") || has_indexed_prefix(key, "radius0.");
}

MarketParams params_from_key_values(const KeyValueMap& kv) {
  MarketParams p;
  const auto n = parse_integer(require(kv, "n"), "n");
  const auto balls = parse_integer(require(kv, "I"), "I");
  if (n < 1 || balls < 1) throw InputError("params: n and I must be >= 1");
  p.n = static_cast<std::size_t>(n);
  p.ball_count = static_cast<std::size_t>(balls);
  p.alpha = parse_double(require(kv, "alpha"), "alpha");
  p.alpha_in = kv.count("alpha_in") ? parse_double(kv.at("alpha_in"), "alpha_in") : 0.0;
  p.c0 = parse_double(require(kv, "c0"), "c0");
  p.cs = parse_double(require(kv, "cs"), "cs");
  double sum_radii = 0.0;
  for (std::size_t i = 1; i <= p.ball_count; ++i) {
    const auto idx = std::to_string(i);
    std::vector<double> center;
    for (auto part : split(require(kv, "center." + idx), ',')) {
      center.push_back(parse_double(part, "center." + idx));
    }
    p.centers.push_back(std::move(center));
    p.radii0.push_back(parse_double(require(kv, "radius0." + idx), "radius0." + idx));
    sum_radii += p.radii0.back();
  }
  for (const auto& [key, value] : kv) {
    if (!has_indexed_prefix(key, "center.") && !has_indexed_prefix(key, "radius0.")) continue;
    const auto idx = parse_integer(key.substr(key.find('.') + 1), key);
    if (idx < 1 || static_cast<std::size_t>(idx) > p.ball_count) {
      throw InputError("params: key '" + key + "' is outside 1..I=" + std::to_string(p.ball_count));
    }
  }
  p.v_inf0 = kv.count("v_inf0") ? parse_double(kv.at("v_inf0"), "v_inf0")
                                 : static_cast<double>(p.ball_count) / sum_radii;
  p.validate();
  return p;
}

void write_params(std::ostream& out, const MarketParams& params) {
  write_key_values(out, params_to_key_values(params));
}

MarketParams read_params(std::istream& in) { return params_from_key_values(read_key_values(in)); }

}  // namespace stefan

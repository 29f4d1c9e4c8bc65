#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <ostream>

#include "stefan/errors.hpp"
#include "stefan/text_format.hpp"

namespace stefan::cli {

namespace {

KeyValueMap read_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw InputError(std::string("cannot open ") + what + " file '" + path + "'");
  try {
    return read_key_values(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

void merge(KeyValueMap& into, const KeyValueMap& from, const std::string& origin) {
  for (const auto& [k, v] : from) {
    if (!is_known_key(k)) throw ConfigError("unknown key '" + k + "' in " + origin);
    into[k] = v;
  }
}

template <class T>
T wrap_parse(const std::string& key, T (*parse)(std::string_view, std::string_view), const std::string& text) {
  try {
    return parse(text, key);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

KeyValueMap default_values() {
  return {
      {"model.order", "deterministic"},
      {"model.corrections", "true"},
      {"model.eps_den", "1e-8"},
      {"sigma.kind", "exponential"},
      {"sigma.lambda", "1"},
      {"sigma.a", "3"},
      {"sigma.r0", "1"},
      {"sigma.h", "1"},
      {"sigma.mode", "lumped"},
      {"noise.dt", "1e-4"},
      {"noise.master_seed", "0"},
      {"integrator.method", "rk45_adaptive"},
      {"integrator.rel_tol", "1e-8"},
      {"integrator.abs_tol", "1e-10"},
      {"integrator.dt_fixed", "1e-4"},
      {"integrator.eps_vanish", "1e-12"},
      {"integrator.max_guard_events", "10000"},
      {"time.t_end", "15"},
      {"time.output_stride", "0.1"},
      {"time.minutes_per_unit", "1"},
      {"scaling.rho_max", "0.1"},
      {"mc.paths", "100"},
      {"mc.threads", "0"},
      {"ingest.cs_factor", "10"},
      {"scenario.cs", "286559.62344244932"},
      {"scenario.horizon_minutes", "8"},
      {"scenario.checkpoints", "0,2,7.079646017699115,8"},
      {"scenario.sigma_kind", "compact"},
      {"ito.r0", "1"},
      {"ito.sigma_r", "0.05"},
      {"ito.horizon", "0.1"},
      {"ito.paths", "10000"},
      {"ito.dt", "1e-3"},
  };
}

bool is_known_key(const std::string& key) {
  static const KeyValueMap defaults = default_values();
  return is_params_key(key) || defaults.count(key) > 0 || key == "sigma.c0";
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) throw ConfigError("missing configuration key '" + key + "'");
  return it->second;
}

double RunConfig::number(const std::string& key) const { return wrap_parse<double>(key, parse_double, get(key)); }

std::size_t RunConfig::count(const std::string& key) const {
  const auto v = wrap_parse<long long>(key, parse_integer, get(key));
  if (v < 0) throw ConfigError(key + " must be >= 0");
  return static_cast<std::size_t>(v);
}

std::uint64_t RunConfig::seed(const std::string& key) const {
  const auto& text = get(key);
  std::uint64_t out = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("invalid unsigned integer for " + key + ": '" + text + "'");
  return out;
}

bool RunConfig::flag(const std::string& key) const {
  const auto& v = get(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + " must be true or false, got '" + v + "'");
}

RunConfig resolve_config(const ConfigSources& sources) {
  RunConfig cfg;
  cfg.values = default_values();
  for (const auto& [k, v] : sources.command_defaults) cfg.values[k] = v;

  if (sources.params_path) {
    const auto kv = read_file(*sources.params_path, "params");
    for (const auto& [k, v] : kv) {
      if (!is_params_key(k)) throw ConfigError("unknown key '" + k + "' in params file");
    }
    merge(cfg.values, kv, "params file");
  }
  if (sources.config_path) merge(cfg.values, read_file(*sources.config_path, "config"), "config file");

  KeyValueMap sets;
  for (const auto& s : sources.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
    const std::string key(trim(std::string_view(s).substr(0, eq)));
    const std::string value(trim(std::string_view(s).substr(eq + 1)));
    if (sets.count(key) && sets[key] != value) throw ConfigError("conflicting --set values for '" + key + "'");
    sets[key] = value;
  }
  merge(cfg.values, sets, "--set");

  for (const auto& [k, v] : sources.flags) {
    const auto it = sets.find(k);
    if (it != sets.end() && it->second != v) {
      throw ConfigError("flag value '" + v + "' conflicts with --set " + k + "=" + it->second);
    }
  }
  merge(cfg.values, sources.flags, "flags");

  if (!cfg.values.count("sigma.c0")) cfg.values["sigma.c0"] = cfg.values.count("c0") ? cfg.values["c0"] : "1";
  cfg.has_params = cfg.values.count("n") > 0 || cfg.values.count("I") > 0;
  return cfg;
}

void write_resolved(std::ostream& out, const RunConfig& cfg) {
  KeyValueList entries;
  if (cfg.has_params) {
    for (auto& kv : params_to_key_values(market_params(cfg))) entries.push_back(std::move(kv));
  }
  for (const auto& [k, v] : cfg.values) {
    if (!is_params_key(k)) entries.emplace_back(k, v);
  }
  write_key_values(out, entries);
}

MarketParams market_params(const RunConfig& cfg) {
  if (!cfg.has_params) throw InputError("no model parameters: pass --params <file>");
  KeyValueMap kv;
  for (const auto& [k, v] : cfg.values) {
    if (is_params_key(k)) kv[k] = v;
  }
  return params_from_key_values(kv);
}

DynamicsOrder dynamics_order(const RunConfig& cfg) {
  const auto& v = cfg.get("model.order");
  if (v == "deterministic" || v == "0") return DynamicsOrder::Deterministic;
  if (v == "1" || v == "stochastic1") return DynamicsOrder::Stochastic1;
  if (v == "2" || v == "stochastic2") return DynamicsOrder::Stochastic2;
  throw ConfigError("model.order must be deterministic, 1 or 2, got '" + v + "'");
}

SigmaProfile sigma_profile(const RunConfig& cfg) {
  const auto kind = sigma_kind_from_string(cfg.get("sigma.kind"));
  const double c0 = cfg.number("sigma.c0");
  SigmaProfile s;
  switch (kind) {
    case SigmaKind::Zero:
      s = SigmaProfile::zero();
      break;
    case SigmaKind::Exponential:
      s = SigmaProfile::exponential(c0, cfg.number("sigma.lambda"));
      break;
    case SigmaKind::PowerTail:
      s = SigmaProfile::power_tail(c0, cfg.number("sigma.a"), cfg.number("sigma.r0"));
      break;
    case SigmaKind::Compact:
      s = SigmaProfile::compact(c0, cfg.number("sigma.h"));
      break;
  }
  try {
    s.validate();
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  return s;
}

ModelSpec model_spec(const RunConfig& cfg, const MarketParams& params) {
  ModelSpec m;
  m.order = dynamics_order(cfg);
  m.alpha = params.alpha;
  m.cs = params.cs;
  m.sigma = sigma_profile(cfg);
  m.sigma_mode = sigma_mode_from_string(cfg.get("sigma.mode"));
  m.second_order_corrections = cfg.flag("model.corrections");
  m.eps_den = cfg.number("model.eps_den");
  return m;
}

IntegratorConfig integrator_config(const RunConfig& cfg) {
  IntegratorConfig c;
  c.method = integration_method_from_string(cfg.get("integrator.method"));
  c.rel_tol = cfg.number("integrator.rel_tol");
  c.abs_tol = cfg.number("integrator.abs_tol");
  c.dt_fixed = cfg.number("integrator.dt_fixed");
  c.eps_vanish = cfg.number("integrator.eps_vanish");
  c.max_guard_events = cfg.count("integrator.max_guard_events");
  c.t_end = cfg.number("time.t_end");
  c.output_stride = cfg.number("time.output_stride");
  c.validate();
  return c;
}

EnsembleConfig ensemble_config(const RunConfig& cfg) {
  EnsembleConfig e;
  e.n_paths = cfg.count("mc.paths");
  e.master_seed = cfg.seed("noise.master_seed");
  e.noise_dt = cfg.number("noise.dt");
  e.threads = cfg.count("mc.threads");
  if (e.n_paths == 0) throw ConfigError("mc.paths must be >= 1");
  if (!(e.noise_dt > 0.0)) throw ConfigError("noise.dt must be > 0");
  return e;
}

FinancialScenarioConfig scenario_config(const RunConfig& cfg) {
  FinancialScenarioConfig s;
  s.n_paths = cfg.count("mc.paths");
  s.master_seed = cfg.seed("noise.master_seed");
  s.noise_dt = cfg.number("noise.dt");
  s.threads = cfg.count("mc.threads");
  s.minutes_per_unit = cfg.number("time.minutes_per_unit");
  s.horizon_minutes = cfg.number("scenario.horizon_minutes");
  s.cs = cfg.number("scenario.cs");
  s.checkpoints_minutes.clear();
  for (auto part : split(cfg.get("scenario.checkpoints"), ',')) {
    s.checkpoints_minutes.push_back(wrap_parse<double>("scenario.checkpoints", parse_double, std::string(part)));
  }
  RunConfig sigma_cfg = cfg;
  sigma_cfg.values["sigma.kind"] = cfg.get("scenario.sigma_kind");
  s.sigma = sigma_profile(sigma_cfg);
  s.sigma_mode = sigma_mode_from_string(cfg.get("sigma.mode"));
  s.integrator = integrator_config(cfg);
  return s;
}

ItoSuiteConfig ito_config(const RunConfig& cfg) {
  ItoSuiteConfig c;
  c.r0 = cfg.number("ito.r0");
  c.sigma_r = cfg.number("ito.sigma_r");
  c.horizon = cfg.number("ito.horizon");
  c.n_paths = cfg.count("ito.paths");
  c.dt = cfg.number("ito.dt");
  c.seed = cfg.seed("noise.master_seed");
  c.threads = cfg.count("mc.threads");
  return c;
}

}  // namespace stefan::cli

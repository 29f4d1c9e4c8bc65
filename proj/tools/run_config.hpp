#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stefan/dynamics.hpp"
#include "stefan/integrator.hpp"
#include "stefan/ito_geometry.hpp"
#include "stefan/lob_ingest.hpp"
#include "stefan/montecarlo.hpp"
#include "stefan/params_io.hpp"
#include "stefan/sigma_profile.hpp"

namespace stefan::cli {

/// Where configuration comes from, lowest precedence first: built-in defaults,
/// the params file, the config file, `--set key=value`, dedicated flags.
struct ConfigSources {
  std::optional<std::string> params_path;
  std::optional<std::string> config_path;
  std::vector<std::string> sets;
  KeyValueMap flags;            // already mapped to config keys
  KeyValueMap command_defaults;  // per-command overrides of the built-in defaults
};

struct RunConfig {
  KeyValueMap values;
  bool has_params = false;

  const std::string& get(const std::string& key) const;
  double number(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  std::uint64_t seed(const std::string& key) const;
  bool flag(const std::string& key) const;
};

bool is_known_key(const std::string& key);
KeyValueMap default_values();

/// Unknown keys and a flag disagreeing with an explicit `--set` of the same key
/// raise ConfigError; unreadable files raise InputError.
RunConfig resolve_config(const ConfigSources& sources);

/// Params keys first in file order, then every other key sorted.
void write_resolved(std::ostream& out, const RunConfig& cfg);

MarketParams market_params(const RunConfig& cfg);
DynamicsOrder dynamics_order(const RunConfig& cfg);
SigmaProfile sigma_profile(const RunConfig& cfg);
ModelSpec model_spec(const RunConfig& cfg, const MarketParams& params);
IntegratorConfig integrator_config(const RunConfig& cfg);
EnsembleConfig ensemble_config(const RunConfig& cfg);
FinancialScenarioConfig scenario_config(const RunConfig& cfg);
ItoSuiteConfig ito_config(const RunConfig& cfg);

}  // namespace stefan::cli

#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "stefan/lob_ingest.hpp"

namespace stefan {

using KeyValueList = std::vector<std::pair<std::string, std::string>>;
using KeyValueMap = std::map<std::string, std::string>;

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
/// Duplicate keys and lines without `=` are rejected with the line number.
KeyValueMap read_key_values(std::istream& in);

void write_key_values(std::ostream& out, const KeyValueList& entries);

/// Keys: n, I, alpha, alpha_in, v_inf0, c0, cs, center.<i>, radius0.<i> (1-based i).
/// Values carry 17 significant digits so a write/read cycle is lossless.
KeyValueList params_to_key_values(const MarketParams& params);

/// Reads the params keys out of `kv`; other keys are ignored here.
MarketParams params_from_key_values(const KeyValueMap& kv);

bool is_params_key(const std::string& key);

void write_params(std::ostream& out, const MarketParams& params);
MarketParams read_params(std::istream& in);

}  // namespace stefan

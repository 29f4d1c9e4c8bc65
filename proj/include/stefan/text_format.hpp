#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stefan {

// Shortest-safe round-trip formatting: 17 significant digits.
std::string format_double(double value);

// Strict parse of a full token; throws InputError naming `what` on failure.
double parse_double(std::string_view text, std::string_view what);
long long parse_integer(std::string_view text, std::string_view what);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char delimiter);

}  // namespace stefan

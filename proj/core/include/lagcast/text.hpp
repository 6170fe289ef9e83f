#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lagcast {

// Shortest-safe decimal: 17 significant digits, round-trips every double.
std::string format_double(double value);
// Shortest text that parses back to the same double (for config files).
std::string format_double_shortest(double value);

std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

std::string_view trim(std::string_view text) noexcept;
std::vector<std::string> split(std::string_view text, char sep);

}  // namespace lagcast

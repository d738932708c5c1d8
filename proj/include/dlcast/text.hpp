#pragma once
#include <optional>
#include <string>
#include <string_view>

namespace dlcast {

// Shortest decimal form that round-trips to the same double.
std::string fmt_double(double v);

// Strict full-string parses; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

} // namespace dlcast

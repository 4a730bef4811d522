#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace rym {

/// Shortest decimal that parses back to the same double.
std::string format_shortest(double v);

/// 17 significant digits, general notation.
std::string format_17g(double v);

/// Whole-token parses; surrounding whitespace is not accepted.
std::optional<double> parse_double(std::string_view s);
std::optional<long> parse_long(std::string_view s);
std::optional<std::uint64_t> parse_u64(std::string_view s);

std::string_view trim(std::string_view s);

}  // namespace rym

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace idfd {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

/// Strict parse of a whole token; throws DomainError on trailing garbage.
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

/// 64-bit FNV-1a, used for config fingerprints.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace idfd

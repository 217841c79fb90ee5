#include "idfd/format.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "idfd/errors.hpp"

namespace idfd {

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    double out = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc{} || res.ptr != last || text.empty()) {
        throw DomainError("not a number: '" + std::string(text) + "'");
    }
    return out;
}

long long parse_integer(std::string_view text) {
    long long out = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc{} || res.ptr != last || text.empty()) {
        throw DomainError("not an integer: '" + std::string(text) + "'");
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace idfd

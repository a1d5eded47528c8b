#pragma once

// Round-trip-exact decimal formatting shared by every file and wire format.

#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace swingbench {

/// Formats a double with 17 significant digits, enough to reproduce the
/// exact bit pattern on parse.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// Strict double parse; rejects trailing garbage and empty tokens.
inline double parse_double(const std::string& tok) {
    const char* begin = tok.data();
    const char* end = begin + tok.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw std::runtime_error("not a number: '" + tok + "'");
    return value;
}

inline long parse_long(const std::string& tok) {
    const char* begin = tok.data();
    const char* end = begin + tok.size();
    long value = 0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw std::runtime_error("not an integer: '" + tok + "'");
    return value;
}

} // namespace swingbench

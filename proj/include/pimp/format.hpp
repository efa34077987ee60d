#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace pimp {

/// Shortest round-trip decimal form; identical on every conforming platform.
inline std::string format_double(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, end);
}

/// Fixed-precision form for human-facing tables.
inline std::string format_fixed(double v, int precision) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, end);
}

inline std::string format_scientific(double v, int precision) {
    char buf[64];
    const auto [end, ec] =
        std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, precision);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, end);
}

}  // namespace pimp

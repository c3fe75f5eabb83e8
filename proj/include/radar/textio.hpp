#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "radar/errors.hpp"

namespace radar {

// All persisted floats use fixed 6-decimal formatting, locale-independent.
// Negative zero is canonicalized to "0.000000" so equal values always
// produce equal bytes.
inline std::string format_fixed6(double v) {
    if (v == 0.0) v = 0.0;  // normalize -0.0
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 6);
    return std::string(buf, res.ptr);
}

// Rounds to 6 decimal places. Values produced by this survive a
// format_fixed6/parse round trip bit-exactly.
inline double quantize6(double v) {
    double q = std::round(v * 1e6) / 1e6;
    if (q == 0.0) q = 0.0;
    return q;
}

inline double parse_double(std::string_view s, const char* what) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ValidationError(std::string("bad float for ") + what + ": '" + std::string(s) + "'");
    return v;
}

inline std::uint64_t parse_u64(std::string_view s, const char* what) {
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ValidationError(std::string("bad integer for ") + what + ": '" + std::string(s) + "'");
    return v;
}

inline std::int64_t parse_i64(std::string_view s, const char* what) {
    std::int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ValidationError(std::string("bad integer for ") + what + ": '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace radar

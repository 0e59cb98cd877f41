#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

#include "hotspot/error.hpp"

namespace hotspot {

// Shortest decimal text that parses back to exactly the same double; "nan",
// "inf" and "-inf" for non-finite values.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

// Strict parse of a whole field; throws InvalidInput naming `what`.
inline double parse_double(std::string_view s, const std::string& what) {
    if (s == "nan" || s == "NaN" || s == "NA") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    auto res = std::from_chars(first, s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw InvalidInput("cli", "cannot parse '" + std::string(s) + "' as a number (" + what + ")");
    }
    return v;
}

}  // namespace hotspot

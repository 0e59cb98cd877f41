#include "hotspot/stats.hpp"

#include <algorithm>
#include <cmath>

#include "hotspot/error.hpp"

namespace hotspot {

double quantile(std::span<const double> values, double q) {
    if (values.empty()) {
        throw InvalidInput("stats", "quantile of an empty sample");
    }
    if (!(q >= 0.0 && q <= 1.0)) {
        throw InvalidInput("stats", "quantile level must lie in [0, 1]");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double mean(std::span<const double> values) {
    if (values.empty()) {
        return 0.0;
    }
    KahanSum s;
    for (double v : values) {
        s.add(v);
    }
    return s.value() / static_cast<double>(values.size());
}

double stddev(std::span<const double> values) {
    if (values.size() < 2) {
        return 0.0;
    }
    const double m = mean(values);
    KahanSum s;
    for (double v : values) {
        s.add((v - m) * (v - m));
    }
    return std::sqrt(s.value() / static_cast<double>(values.size() - 1));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace hotspot

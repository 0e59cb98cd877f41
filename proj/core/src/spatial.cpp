#include "hotspot/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <string>

#include "hotspot/error.hpp"

namespace hotspot {

void GraphSpec::validate() const {
    if (neighbor_count < 1) {
        throw InvalidInput("cli", "neighbor count L must be at least 1, got " + std::to_string(neighbor_count));
    }
}

double greatcircle_km(double lon1, double lat1, double lon2, double lat2) {
    constexpr double deg = std::numbers::pi / 180.0;
    const double dlat = (lat2 - lat1) * deg;
    const double dlon = (lon2 - lon1) * deg;
    const double s = std::sin(dlat / 2);
    const double t = std::sin(dlon / 2);
    const double h = s * s + std::cos(lat1 * deg) * std::cos(lat2 * deg) * t * t;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

double euclidean(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        acc += d * d;
    }
    return std::sqrt(acc);
}

FusionGraph build_graph(const std::vector<std::vector<double>>& loc, const GraphSpec& spec) {
    spec.validate();
    const std::size_t K = loc.size();
    for (std::size_t i = 0; i < K; ++i) {
        const std::size_t need = spec.distance == Distance::greatcircle ? 2 : 1;
        if (loc[i].size() < need || loc[i].size() != loc[0].size()) {
            throw InvalidInput("cli", "location of row " + std::to_string(i) + " has the wrong dimension");
        }
        for (double v : loc[i]) {
            if (!std::isfinite(v)) throw InvalidInput("cli", "non-finite location in row " + std::to_string(i));
        }
    }
    std::vector<double> rho(K * K, 0.0);
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = i + 1; j < K; ++j) {
            const double d = spec.distance == Distance::greatcircle
                                 ? greatcircle_km(loc[i][0], loc[i][1], loc[j][0], loc[j][1])
                                 : euclidean(loc[i], loc[j]);
            if (!(d > 0.0)) {
                throw InvalidInput("cli", "coincident locations in rows " + std::to_string(i) + " and " +
                                              std::to_string(j));
            }
            rho[i * K + j] = rho[j * K + i] = 1.0 / d;
        }
    }
    std::set<std::pair<std::size_t, std::size_t>> kept;
    const std::size_t L = std::min<std::size_t>(static_cast<std::size_t>(spec.neighbor_count), K ? K - 1 : 0);
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < K; ++i) {
        order.clear();
        for (std::size_t j = 0; j < K; ++j) {
            if (j != i) order.push_back(j);
        }
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return rho[i * K + a] > rho[i * K + b]; });
        for (std::size_t r = 0; r < L; ++r) {
            kept.emplace(std::min(i, order[r]), std::max(i, order[r]));
        }
    }
    std::vector<FusionEdge> edges;
    edges.reserve(kept.size());
    for (auto [i, j] : kept) edges.push_back({i, j, rho[i * K + j]});
    return FusionGraph(K, std::move(edges), spec.normalize);
}

}  // namespace hotspot

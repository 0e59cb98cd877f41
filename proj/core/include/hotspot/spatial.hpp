#pragma once

#include <span>
#include <vector>

#include "hotspot/graph.hpp"

namespace hotspot {

enum class Distance { euclidean, greatcircle };

struct GraphSpec {
    Distance distance = Distance::euclidean;
    int neighbor_count = 5;  // L; values >= K - 1 keep the complete graph
    bool normalize = true;

    void validate() const;
};

inline constexpr double kEarthRadiusKm = 6371.0;

// Haversine distance between (longitude, latitude) points given in degrees.
double greatcircle_km(double lon1, double lat1, double lon2, double lat2);

double euclidean(std::span<const double> a, std::span<const double> b);

// rho = 1 / d over all pairs, then each node keeps its L largest rho (ties by
// lower index); an edge survives if either endpoint keeps it. Coincident
// locations throw InvalidInput naming both rows.
FusionGraph build_graph(const std::vector<std::vector<double>>& locations, const GraphSpec& spec);

}  // namespace hotspot

#include "hotspot/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hotspot/error.hpp"

namespace hotspot {

FusionGraph::FusionGraph(std::size_t num_nodes, std::vector<FusionEdge> edges, bool normalize)
    : num_nodes_(num_nodes), edges_(std::move(edges)) {
    for (auto& e : edges_) {
        if (e.i == e.j) {
            throw InvalidInput("graph", "self-edge at node " + std::to_string(e.i));
        }
        if (e.i > e.j) std::swap(e.i, e.j);
        if (e.j >= num_nodes_) {
            throw InvalidInput("graph", "edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                                            ") out of range for " + std::to_string(num_nodes_) +
                                            " nodes");
        }
        if (!(e.rho >= 0.0) || !std::isfinite(e.rho)) {
            throw InvalidInput("graph", "edge weights must be finite and nonnegative");
        }
    }
    std::sort(edges_.begin(), edges_.end(), [](const FusionEdge& a, const FusionEdge& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    for (std::size_t k = 1; k < edges_.size(); ++k) {
        if (edges_[k].i == edges_[k - 1].i && edges_[k].j == edges_[k - 1].j) {
            throw InvalidInput("graph", "duplicate edge (" + std::to_string(edges_[k].i) + ", " +
                                            std::to_string(edges_[k].j) + ")");
        }
    }
    if (normalize) {
        const double m = max_rho();
        if (m > 0.0) {
            for (auto& e : edges_) e.rho /= m;
        }
    }
}

double FusionGraph::max_rho() const {
    double m = 0.0;
    for (const auto& e : edges_) m = std::max(m, e.rho);
    return m;
}

FusionGraph FusionGraph::scaled(double c) const {
    auto edges = edges_;
    for (auto& e : edges) e.rho *= c;
    return FusionGraph(num_nodes_, std::move(edges), false);
}

std::vector<std::size_t> FusionGraph::components() const {
    std::vector<std::size_t> parent(num_nodes_);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const auto& e : edges_) {
        if (e.rho > 0.0) {
            const auto a = find(e.i), b = find(e.j);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    }
    std::vector<std::size_t> label(num_nodes_);
    for (std::size_t v = 0; v < num_nodes_; ++v) label[v] = find(v);
    return label;
}

bool FusionGraph::connected() const {
    const auto label = components();
    return std::all_of(label.begin(), label.end(), [](std::size_t l) { return l == 0; });
}

}  // namespace hotspot

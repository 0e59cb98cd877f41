#pragma once

#include <cstddef>
#include <vector>

namespace hotspot {

struct FusionEdge {
    std::size_t i = 0;  // always i < j once stored in a FusionGraph
    std::size_t j = 0;
    double rho = 0.0;
};

// Sparse symmetric fusion weights over K regions. Edges are stored once with
// i < j, sorted lexicographically. With normalize = true the largest rho is
// rescaled to 1.
class FusionGraph {
public:
    FusionGraph() = default;
    FusionGraph(std::size_t num_nodes, std::vector<FusionEdge> edges, bool normalize = true);

    std::size_t num_nodes() const { return num_nodes_; }
    std::size_t num_edges() const { return edges_.size(); }
    const std::vector<FusionEdge>& edges() const { return edges_; }
    bool empty() const { return edges_.empty(); }
    double max_rho() const;

    // Every rho multiplied by c (no renormalization).
    FusionGraph scaled(double c) const;

    // Connected components over edges with rho > 0; label per node.
    std::vector<std::size_t> components() const;
    bool connected() const;

private:
    std::size_t num_nodes_ = 0;
    std::vector<FusionEdge> edges_;
};

}  // namespace hotspot

#pragma once

#include <iosfwd>
#include <vector>

#include "hotspot/dataset.hpp"
#include "hotspot/graph.hpp"
#include "hotspot/params.hpp"
#include "hotspot/solver.hpp"
#include "hotspot/spatial.hpp"

namespace hotspot {

// dim(alpha) + number of fused beta groups + number of nonzero gamma.
int degrees_of_freedom(const ModelParams& params, double merge_tol = 1e-4);
int degrees_of_freedom(const FitResult& fit, double merge_tol = 1e-4);

// -2 w.. loglik + DF (1 + log w..), with loglik the normalized weighted log-likelihood.
double bic_star(const Dataset& ds, const ModelParams& params, int df);
double bic_star(const Dataset& ds, const FitResult& fit);

struct TuningGrid {
    std::vector<double> lambda1_values;
    std::vector<double> lambda2_values;
    std::vector<int> neighbor_counts;  // empty: the caller supplies a single graph

    // lambda1 = 2^12, ..., 2^-8 and lambda2 = 2^2, ..., 2^-5 (powers of 2).
    static TuningGrid defaults();

    // Nonempty, positive, finite, strictly descending.
    void validate() const;
};

struct LabeledGraph {
    int neighbor_count = 0;  // 0 when the graph is not a top-L truncation
    FusionGraph graph;
};

struct TuningRow {
    int neighbor_count = 0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double bic = 0.0;
    int df = 0;
    bool converged = false;
    int iterations = 0;
};

struct TuningResult {
    TuningRow best_row;
    FitResult best;
    std::size_t best_graph = 0;   // index into the graphs that were tuned over
    std::vector<TuningRow> table;  // one row per (L, lambda1, lambda2), in traversal order
};

// Warm-started path: for each graph, lambda1 descending; within a lambda1,
// lambda2 descending, each fit started from the previous one in the chain and
// each chain head from the previous chain head. Fits that throw or do not
// converge are recorded and excluded. Ties in BIC* go to larger lambda1, then
// larger lambda2, then smaller L. Graphs are processed on up to `threads`
// workers; the result does not depend on the thread count. `init` starts the
// first chain head (default_init otherwise).
TuningResult tune(const Dataset& ds, const std::vector<LabeledGraph>& graphs, const TuningGrid& grid,
                  const SolverConfig& cfg = {}, int threads = 1, const ModelParams* init = nullptr);

// Builds one graph per grid.neighbor_counts entry (or spec.neighbor_count if
// that list is empty) from the dataset's region locations.
TuningResult tune(const Dataset& ds, const GraphSpec& spec, const TuningGrid& grid, const SolverConfig& cfg = {},
                  int threads = 1);

void write_tuning_csv(std::ostream& out, const std::vector<TuningRow>& table);

}  // namespace hotspot

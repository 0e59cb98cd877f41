#include "hotspot/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "hotspot/error.hpp"
#include "hotspot/format.hpp"
#include "hotspot/graphfuse.hpp"
#include "hotspot/objective.hpp"
#include "hotspot/parallel.hpp"

namespace hotspot {

int degrees_of_freedom(const ModelParams& params, double merge_tol) {
    const auto groups = params.beta.size() ? fused_groups(params.beta, merge_tol).size() : 0;
    int nonzero = 0;
    for (Eigen::Index i = 0; i < params.gamma.size(); ++i) {
        nonzero += params.gamma[i] != 0.0;
    }
    return static_cast<int>(params.alpha.size()) + static_cast<int>(groups) + nonzero;
}

int degrees_of_freedom(const FitResult& fit, double merge_tol) { return degrees_of_freedom(fit.params, merge_tol); }

double bic_star(const Dataset& ds, const ModelParams& params, int df) {
    const double w = ds.total_weight();
    return 2.0 * w * neg_loglik(ds, params) + df * (1.0 + std::log(w));
}

double bic_star(const Dataset& ds, const FitResult& fit) { return bic_star(ds, fit.params, fit.df); }

TuningGrid TuningGrid::defaults() {
    TuningGrid g;
    for (int e = 12; e >= -8; --e) g.lambda1_values.push_back(std::ldexp(1.0, e));
    for (int e = 2; e >= -5; --e) g.lambda2_values.push_back(std::ldexp(1.0, e));
    return g;
}

namespace {

void check_values(const std::vector<double>& v, const char* name) {
    if (v.empty()) throw InvalidInput("tuning", std::string(name) + " grid is empty");
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!std::isfinite(v[k]) || !(v[k] > 0.0)) {
            throw InvalidInput("tuning", std::string(name) + " values must be positive and finite");
        }
        if (k > 0 && !(v[k] < v[k - 1])) {
            throw InvalidInput("tuning", std::string(name) + " values must be strictly descending");
        }
    }
}

// True if a is preferred over b (both converged).
bool better(const TuningRow& a, const TuningRow& b) {
    if (a.bic != b.bic) return a.bic < b.bic;
    if (a.lambda1 != b.lambda1) return a.lambda1 > b.lambda1;
    if (a.lambda2 != b.lambda2) return a.lambda2 > b.lambda2;
    return a.neighbor_count < b.neighbor_count;
}

struct GraphPath {
    std::vector<TuningRow> rows;
    std::optional<FitResult> best;
    std::optional<TuningRow> best_row;
};

GraphPath run_path(const Dataset& ds, const LabeledGraph& lg, const TuningGrid& grid, const SolverConfig& cfg,
                   const ModelParams* start) {
    GraphPath out;
    std::optional<FitResult> chain_head;
    for (double l1 : grid.lambda1_values) {
        std::optional<FitResult> prev = chain_head;
        if (!prev && start) {
            prev.emplace();
            prev->params = *start;
        }
        bool head_set = false;
        for (double l2 : grid.lambda2_values) {
            TuningRow row{lg.neighbor_count, l1, l2, std::numeric_limits<double>::quiet_NaN(), 0, false, 0};
            try {
                std::optional<ModelParams> init;
                const FuseWarmStart* warm = nullptr;
                if (prev) {
                    init = prev->params;
                    if (prev->fuse_state.subgradient.size() > 0) warm = &prev->fuse_state;
                }
                FitResult f = fit(ds, lg.graph, PenaltyConfig{l1, l2}, cfg, init, warm);
                row.bic = f.bic;
                row.df = f.df;
                row.converged = f.converged;
                row.iterations = f.outer_iterations;
                if (row.converged && (!out.best_row || better(row, *out.best_row))) {
                    out.best_row = row;
                    out.best = f;
                }
                prev = std::move(f);
                if (!head_set) {
                    chain_head = prev;
                    head_set = true;
                }
            } catch (const NonConvergence&) {
                // recorded as non-converged; the chain continues from the last good fit
            }
            out.rows.push_back(row);
        }
    }
    return out;
}

}  // namespace

void TuningGrid::validate() const {
    check_values(lambda1_values, "lambda1");
    check_values(lambda2_values, "lambda2");
    for (int L : neighbor_counts) {
        if (L < 1) throw InvalidInput("tuning", "neighbor counts must be at least 1");
    }
}

TuningResult tune(const Dataset& ds, const std::vector<LabeledGraph>& graphs, const TuningGrid& grid,
                  const SolverConfig& cfg, int threads, const ModelParams* init) {
    grid.validate();
    cfg.validate();
    if (graphs.empty()) throw InvalidInput("tuning", "no graph to tune over");
    std::vector<GraphPath> paths(graphs.size());
    parallel_for(graphs.size(), threads, [&](std::size_t g) { paths[g] = run_path(ds, graphs[g], grid, cfg, init); });

    TuningResult res;
    bool found = false;
    for (std::size_t g = 0; g < paths.size(); ++g) {
        auto& p = paths[g];
        res.table.insert(res.table.end(), p.rows.begin(), p.rows.end());
        if (p.best_row && (!found || better(*p.best_row, res.best_row))) {
            res.best_row = *p.best_row;
            res.best = std::move(*p.best);
            res.best_graph = g;
            found = true;
        }
    }
    if (!found) {
        throw NonConvergence("tuning", "no fit on the grid converged (" + std::to_string(res.table.size()) +
                                           " attempted)");
    }
    return res;
}

TuningResult tune(const Dataset& ds, const GraphSpec& spec, const TuningGrid& grid, const SolverConfig& cfg,
                  int threads) {
    std::vector<std::vector<double>> loc;
    loc.reserve(ds.num_regions());
    for (const auto& r : ds.regions()) loc.push_back(r.location);
    std::vector<int> counts = grid.neighbor_counts;
    if (counts.empty()) counts.push_back(spec.neighbor_count);
    std::vector<LabeledGraph> graphs;
    for (int L : counts) {
        GraphSpec s = spec;
        s.neighbor_count = L;
        graphs.push_back({L, build_graph(loc, s)});
    }
    return tune(ds, graphs, grid, cfg, threads);
}

void write_tuning_csv(std::ostream& out, const std::vector<TuningRow>& table) {
    out << "L,lambda1,lambda2,bic,df,converged,iterations\n";
    for (const auto& r : table) {
        out << r.neighbor_count << ',' << format_double(r.lambda1) << ',' << format_double(r.lambda2) << ','
            << format_double(r.bic) << ',' << r.df << ',' << (r.converged ? 1 : 0) << ',' << r.iterations << '\n';
    }
}

}  // namespace hotspot

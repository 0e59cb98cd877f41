#pragma once

#include <cstdint>
#include <vector>

#include "hotspot/dataset.hpp"
#include "hotspot/graph.hpp"
#include "hotspot/params.hpp"
#include "hotspot/solver.hpp"

namespace hotspot {

struct BootstrapOptions {
    int replicates = 1000;  // B
    std::uint64_t seed = 1;
    int threads = 1;
    int max_region_attempts = 100;
    double level = 0.95;  // percentile interval coverage
};

struct PercentileInterval {
    double estimate = 0.0;  // value at the reference fit
    double low = 0.0;
    double high = 0.0;
};

struct BootstrapResult {
    int replicates = 0;
    std::vector<double> detection_frequency;         // per region, share of fits with gamma_i != 0
    std::vector<PercentileInterval> alpha;           // per coefficient
    std::vector<PercentileInterval> baseline_rate;   // per region, expit(beta_i)
    std::vector<PercentileInterval> adjusted_rate;   // per region
};

// Stratified resample b: every region's subjects are drawn with replacement
// from that region, keeping its size; a draw whose observed rate is 0 or 1 is
// redrawn (up to max_region_attempts, then InvalidInput). Stream (seed, b).
Dataset bootstrap_resample(const Dataset& ds, std::uint64_t seed, int b, int max_region_attempts = 100);

// Refits each resample at the fixed penalty, warm-started from `reference`.
BootstrapResult bootstrap(const Dataset& ds, const FusionGraph& graph, const PenaltyConfig& pen,
                          const SolverConfig& cfg, const FitResult& reference, const BootstrapOptions& options);

}  // namespace hotspot

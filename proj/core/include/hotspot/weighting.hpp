#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hotspot/dataset.hpp"

namespace hotspot {

// Target population proportions of post-stratification cells. A cell is the
// tuple of values of the named covariates (subject- or region-level).
struct StrataTargets {
    std::vector<std::string> covariates;
    std::map<std::vector<double>, double> proportions;

    // Positive proportions summing to 1 within 1e-9; key length matches covariates.
    void validate() const;
};

struct MissingnessOptions {
    // Extra product terms Q_a * Q_b, indices into the (Z, X) design row.
    std::vector<std::pair<std::size_t, std::size_t>> interactions;
    double gradient_tol = 1e-10;
    int max_iter = 100;
};

// Logistic regression of R on (1, Z, X[, interactions]) over all subjects.
// Returns one observation probability per subject.
std::vector<double> fit_missingness_model(const Dataset& ds, const MissingnessOptions& options = {});

struct IpwResult {
    std::vector<double> weights;  // 1 / p for observed subjects (capped), 1 for unobserved
    double cap = 0.0;
    std::size_t num_capped = 0;
};

IpwResult inverse_probability_weights(std::span<const double> probs, std::span<const int> observed,
                                      double cap_quantile = 0.99);

// factor(cell) = target(cell) / ipw-weighted share of the cell among observed
// subjects. Unobserved subjects whose cell has no observed mass get factor 1.
std::vector<double> post_stratification_factors(const Dataset& ds, std::span<const double> ipw,
                                                const StrataTargets& targets);

struct WeightSummary {
    double min = 0.0;
    double q05 = 0.0;
    double median = 0.0;
    double q95 = 0.0;
    double max = 0.0;
};

struct WeightReport {
    std::vector<double> ipw;
    std::vector<double> post_strat_factor;
    std::vector<double> final_weight;
    WeightSummary summary;  // of final weights over observed subjects
    std::size_t num_capped = 0;
    double cap = 0.0;
    Dataset weighted;  // input dataset carrying final_weight
};

// ipw (skipped, all 1, when nothing is missing) times the post-stratification
// factor (all 1 without targets).
WeightReport build_final_weights(const Dataset& ds, const std::optional<StrataTargets>& targets,
                                 double cap_quantile = 0.99, const MissingnessOptions& options = {});

}  // namespace hotspot

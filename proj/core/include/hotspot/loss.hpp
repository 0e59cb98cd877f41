#pragma once

#include "hotspot/stats.hpp"

namespace hotspot {

// Per-observation loss of a canonical-link GLM, written as
// value(eta, y) = cumulant(eta) - y * eta. The solver only touches the family
// through this interface; Bernoulli/logit is the one family shipped.
struct BernoulliLoss {
    static double cumulant(double eta) { return log1pexp(eta); }
    static double mean(double eta) { return expit(eta); }
    // Second derivative of the cumulant, mean * (1 - mean), computed without
    // cancellation for large |eta|.
    static double variance(double eta) {
        const double e = std::exp(-std::abs(eta));
        return e / ((1.0 + e) * (1.0 + e));
    }
    static double value(double eta, double y) { return cumulant(eta) - y * eta; }
};

using Loss = BernoulliLoss;

}  // namespace hotspot

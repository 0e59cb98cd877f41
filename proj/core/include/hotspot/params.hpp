#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace hotspot {

// alpha = (alpha_1, alpha_2) stacks subject- then region-level coefficients.
struct ModelParams {
    Eigen::VectorXd alpha;
    Eigen::VectorXd beta;
    Eigen::VectorXd gamma;

    static ModelParams zeros(std::size_t alpha_dim, std::size_t num_regions) {
        return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(alpha_dim)),
                Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_regions)),
                Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_regions))};
    }

    bool all_finite() const { return alpha.allFinite() && beta.allFinite() && gamma.allFinite(); }
};

struct PenaltyConfig {
    double lambda1 = 0.0;  // fusion strength
    double lambda2 = 0.0;  // hard-penalty threshold

    void validate() const;
};

}  // namespace hotspot

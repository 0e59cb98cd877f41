#include "hotspot/objective.hpp"

#include <cmath>
#include <string>

#include "hotspot/error.hpp"
#include "hotspot/loss.hpp"
#include "hotspot/stats.hpp"

namespace hotspot {

void PenaltyConfig::validate() const {
    if (!(lambda1 >= 0.0) || !std::isfinite(lambda1) || !(lambda2 >= 0.0) || !std::isfinite(lambda2)) {
        throw InvalidInput("core", "penalty levels must be finite and nonnegative");
    }
}

void check_dimensions(const Dataset& ds, const ModelParams& p) {
    const auto K = static_cast<Eigen::Index>(ds.num_regions());
    if (p.alpha.size() != static_cast<Eigen::Index>(ds.alpha_dim())) {
        throw InvalidInput("core", "alpha has length " + std::to_string(p.alpha.size()) +
                                       ", dataset covariate dimension is " +
                                       std::to_string(ds.alpha_dim()));
    }
    if (p.beta.size() != K || p.gamma.size() != K) {
        throw InvalidInput("core", "beta and gamma must have one entry per region (K = " +
                                       std::to_string(K) + ")");
    }
}

Eigen::VectorXd linear_predictor(const Dataset& ds, const ModelParams& p) {
    check_dimensions(ds, p);
    const auto& pt = ds.patterns();
    Eigen::VectorXd eta = pt.design * p.alpha;
    for (std::size_t r = 0; r < pt.size(); ++r) {
        const auto i = static_cast<Eigen::Index>(pt.region[r]);
        eta[static_cast<Eigen::Index>(r)] += p.beta[i] + p.gamma[i];
    }
    return eta;
}

double neg_loglik(const Dataset& ds, const ModelParams& p) {
    const Eigen::VectorXd eta = linear_predictor(ds, p);
    const auto& pt = ds.patterns();
    KahanSum sum;
    for (Eigen::Index r = 0; r < eta.size(); ++r) {
        sum.add(pt.weight[r] * Loss::cumulant(eta[r]) - pt.successes[r] * eta[r]);
    }
    return sum.value() / ds.total_weight();
}

LoglikGradient neg_loglik_grad(const Dataset& ds, const ModelParams& p) {
    const Eigen::VectorXd eta = linear_predictor(ds, p);
    const auto& pt = ds.patterns();
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index r = 0; r < eta.size(); ++r) {
        resid[r] = (pt.weight[r] * Loss::mean(eta[r]) - pt.successes[r]) / ds.total_weight();
    }
    LoglikGradient g;
    g.alpha = pt.design.transpose() * resid;
    g.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ds.num_regions()));
    for (std::size_t r = 0; r < pt.size(); ++r) {
        g.beta[static_cast<Eigen::Index>(pt.region[r])] += resid[static_cast<Eigen::Index>(r)];
    }
    g.gamma = g.beta;
    return g;
}

double fusion_penalty(const Eigen::VectorXd& beta, const FusionGraph& g, double lambda1) {
    double sum = 0.0;
    for (const auto& e : g.edges()) {
        if (e.j >= static_cast<std::size_t>(beta.size())) {
            throw InvalidInput("core", "fusion edge (" + std::to_string(e.i) + ", " +
                                           std::to_string(e.j) + ") out of range for beta of length " +
                                           std::to_string(beta.size()));
        }
        sum += e.rho * std::abs(beta[static_cast<Eigen::Index>(e.i)] - beta[static_cast<Eigen::Index>(e.j)]);
    }
    return lambda1 * sum;
}

double hard_penalty(double t, double lambda) {
    const double a = std::abs(t);
    if (a < lambda) {
        return lambda * a - 0.5 * t * t;
    }
    return 0.5 * lambda * lambda;
}

double sparse_penalty(const Dataset& ds, const Eigen::VectorXd& gamma, double lambda2) {
    double sum = 0.0;
    for (std::size_t i = 0; i < ds.num_regions(); ++i) {
        sum += ds.region_weight(i) * hard_penalty(gamma[static_cast<Eigen::Index>(i)], lambda2);
    }
    return sum / ds.total_weight();
}

double objective(const Dataset& ds, const ModelParams& p, const FusionGraph& g,
                 const PenaltyConfig& pen) {
    return neg_loglik(ds, p) + fusion_penalty(p.beta, g, pen.lambda1) +
           sparse_penalty(ds, p.gamma, pen.lambda2);
}

}  // namespace hotspot

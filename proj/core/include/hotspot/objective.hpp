#pragma once

#include <Eigen/Core>

#include "hotspot/dataset.hpp"
#include "hotspot/graph.hpp"
#include "hotspot/params.hpp"

namespace hotspot {

// Throws InvalidInput when params do not match the dataset's dimensions.
void check_dimensions(const Dataset& ds, const ModelParams& p);

// Linear predictor eta = Q alpha + beta_i + gamma_i, one entry per pattern.
Eigen::VectorXd linear_predictor(const Dataset& ds, const ModelParams& p);

// (1 / w..) sum_ij w_ij I(R_ij = 1) [log(1 + exp(eta_ij)) - Y_ij eta_ij]
double neg_loglik(const Dataset& ds, const ModelParams& p);

struct LoglikGradient {
    Eigen::VectorXd alpha;
    Eigen::VectorXd beta;
    Eigen::VectorXd gamma;  // identical to beta: both enter eta as the same offset
};

LoglikGradient neg_loglik_grad(const Dataset& ds, const ModelParams& p);

// lambda1 * sum_edges rho |beta_i - beta_j|
double fusion_penalty(const Eigen::VectorXd& beta, const FusionGraph& g, double lambda1);

// Hard penalty q_lambda(t): lambda|t| - t^2/2 for |t| < lambda, lambda^2/2 beyond.
double hard_penalty(double t, double lambda);

// (1 / w..) sum_i w_i. q_lambda2(gamma_i)
double sparse_penalty(const Dataset& ds, const Eigen::VectorXd& gamma, double lambda2);

double objective(const Dataset& ds, const ModelParams& p, const FusionGraph& g,
                 const PenaltyConfig& pen);

}  // namespace hotspot

#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "hotspot/dataset.hpp"
#include "hotspot/graph.hpp"
#include "hotspot/graphfuse.hpp"
#include "hotspot/params.hpp"

namespace hotspot {

struct SolverConfig {
    double outer_tol = 1e-6;  // relative objective change between outer iterations
    int max_outer_iter = 500;
    double alpha_newton_tol = 1e-10;  // sup-norm of the normalized alpha gradient
    int alpha_max_newton_iter = 100;
    int gamma_grid_size = 201;
    double gamma_root_tol = 1e-8;
    double line_search_tol = 1e-6;
    double merge_tol = 1e-4;  // beta values closer than this count as one group in DF
    FuseOptions fuse;

    // Blocks left false stay at their initial values (oracle variants).
    bool update_alpha = true;
    bool update_beta = true;
    bool update_gamma = true;

    void validate() const;
};

struct FitResult {
    ModelParams params;
    std::vector<double> objective_trace;  // initial value, then one entry per sub-step
    bool converged = false;
    int outer_iterations = 0;
    int df = 0;
    double bic = 0.0;
    FuseWarmStart fuse_state;
};

// Weighted offset logistic regression for alpha (no intercept) by damped
// Newton with step halving, started from params.alpha.
Eigen::VectorXd alpha_step(const Dataset& ds, const ModelParams& params, const SolverConfig& cfg);

// Curvatures a_i and targets b_i of the local quadratic approximation of the
// beta-partial likelihood (unnormalized: divide by w.. to get the objective).
struct QuadCoefficients {
    Eigen::VectorXd a;
    Eigen::VectorXd b;
};
QuadCoefficients beta_quad_coeffs(const Dataset& ds, const ModelParams& params);

struct BetaStepResult {
    Eigen::VectorXd beta;
    double step = 1.0;          // h applied along the segment to the surrogate minimizer
    bool line_searched = false;
    FuseWarmStart fuse_state;
};

BetaStepResult beta_step(const Dataset& ds, const ModelParams& params, const FusionGraph& graph,
                         const SolverConfig& cfg, const PenaltyConfig& pen,
                         const FuseWarmStart* warm = nullptr);

// One region's gamma problem: phi(t) = l(t) + w_i. q_lambda(t) with
// l(t) = sum_p W_p log(1 + exp(t + nu_p)) - S_p (t + nu_p).
class UnivariateGammaProblem {
public:
    UnivariateGammaProblem(std::vector<double> weight, std::vector<double> successes,
                           std::vector<double> offset, double region_weight);

    double loss(double t) const;
    double loss_derivative(double t) const;
    double loss_curvature(double t) const;
    double value(double t, double lambda) const;

    // argmin_t l(t) on [-30, 30] by safeguarded Newton.
    double unpenalized_minimizer(double tol = 1e-8) const;

    // Global minimizer of value(., lambda) over {t~} and a uniform grid of
    // grid_size points on [-lambda, lambda]; ties go to smaller |t|, then t > 0.
    double minimize(double lambda, int grid_size, double tol = 1e-8) const;

private:
    std::vector<double> weight_, successes_, offset_;
    double region_weight_;
};

UnivariateGammaProblem gamma_problem(const Dataset& ds, const ModelParams& params, std::size_t region);

Eigen::VectorXd gamma_step(const Dataset& ds, const ModelParams& params, const SolverConfig& cfg,
                           const PenaltyConfig& pen);

// alpha = 0, beta_i = logit of the weighted crude rate clamped to [0.01, 0.99], gamma = 0.
ModelParams default_init(const Dataset& ds);

// Alternating minimization alpha -> beta -> gamma until the relative objective
// change falls to cfg.outer_tol. Every sub-step is accepted only if it does not
// raise the objective, so objective_trace is non-increasing.
FitResult fit(const Dataset& ds, const FusionGraph& graph, const PenaltyConfig& pen,
              const SolverConfig& cfg = {}, const std::optional<ModelParams>& init = std::nullopt,
              const FuseWarmStart* warm = nullptr);

}  // namespace hotspot

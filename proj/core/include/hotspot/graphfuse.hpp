#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "hotspot/error.hpp"
#include "hotspot/graph.hpp"

namespace hotspot {

// minimize (1 / (2 scale)) sum_i a_i (beta_i - b_i)^2 + lambda1 sum_e rho_e |beta_i - beta_j|
struct QuadFuseProblem {
    Eigen::VectorXd a;
    Eigen::VectorXd b;
    FusionGraph graph;
    double lambda1 = 0.0;
    double scale = 1.0;

    void validate() const;
    double value(const Eigen::VectorXd& beta) const;
};

struct FuseOptions {
    double tol = 1e-8;  // absolute KKT residual
    int max_iter = 10000;
    double admm_rho = 1.0;  // augmentation, relative to unit mean curvature
    double over_relaxation = 1.5;
    int polish_every = 10;
};

// Normalized edge subgradients in [-1, 1]; carrying them between closely
// related problems warm-starts the ADMM dual.
struct FuseWarmStart {
    Eigen::VectorXd subgradient;
};

struct FuseSolution {
    Eigen::VectorXd beta;
    double kkt_residual = 0.0;
    int iterations = 0;
    FuseWarmStart state;
};

class FuseNonConvergence : public NonConvergence {
public:
    FuseNonConvergence(const std::string& what, Eigen::VectorXd best, double residual)
        : NonConvergence("graphfuse", what), best_(std::move(best)), residual_(residual) {}

    const Eigen::VectorXd& best_iterate() const { return best_; }
    double residual() const { return residual_; }

private:
    Eigen::VectorXd best_;
    double residual_;
};

// ADMM on edge differences; every `polish_every` iterations the current
// fusion pattern is solved in closed form and certified by the KKT residual.
// Throws FuseNonConvergence carrying the best iterate if no certificate is
// reached within max_iter.
FuseSolution solve_quad_fuse(const QuadFuseProblem& problem, const FuseOptions& options = {},
                             const FuseWarmStart* warm = nullptr);

// Subgradient-optimality residual of beta: max over nodes of the stationarity
// violation, minimized over admissible subgradients of fused edges (edges with
// |beta_i - beta_j| <= fuse_tol). The minimization is a bounded-flow
// feasibility problem solved exactly by max-flow.
double kkt_residual(const QuadFuseProblem& problem, const Eigen::VectorXd& beta, double fuse_tol = 0.0);

// Partition of indices into groups of (approximately) equal value: sorted
// values whose adjacent gap is below merge_tol share a group. Groups are
// ordered by value, members by index.
std::vector<std::vector<std::size_t>> fused_groups(const Eigen::VectorXd& beta, double merge_tol = 1e-4);

}  // namespace hotspot

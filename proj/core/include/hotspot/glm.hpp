#pragma once

#include <Eigen/Core>

namespace hotspot {

struct LogisticOptions {
    double gradient_tol = 1e-10;  // sup-norm of the gradient of the mean loss
    int max_iter = 100;
    double ridge = 1e-8;  // added to the Hessian diagonal only if it is not positive definite
};

struct LogisticFit {
    Eigen::VectorXd coef;
    double loss = 0.0;           // sum(w * cumulant(eta) - s * eta) / sum(w)
    double gradient_norm = 0.0;  // sup-norm at coef
    int iterations = 0;
    bool converged = false;
};

// Weighted logistic regression on aggregated rows: row r has design X.row(r),
// total weight w_r, weighted successes s_r and fixed offset o_r. Damped Newton
// with step halving from `start`; the loss never increases. Throws
// InvalidInput if the Hessian stays singular after ridge damping.
LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& weight, const Eigen::VectorXd& successes,
                         const Eigen::VectorXd& offset, const Eigen::VectorXd& start,
                         const LogisticOptions& options = {});

}  // namespace hotspot

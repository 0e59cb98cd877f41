#include "hotspot/glm.hpp"

#include <Eigen/Cholesky>

#include "hotspot/error.hpp"
#include "hotspot/loss.hpp"
#include "hotspot/stats.hpp"

namespace hotspot {

namespace {

double mean_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& w, const Eigen::VectorXd& s,
                 const Eigen::VectorXd& offset, const Eigen::VectorXd& coef, double wsum) {
    const Eigen::VectorXd eta = X * coef + offset;
    KahanSum acc;
    for (Eigen::Index r = 0; r < eta.size(); ++r) {
        acc.add(w[r] * Loss::cumulant(eta[r]) - s[r] * eta[r]);
    }
    return acc.value() / wsum;
}

}  // namespace

LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& weight, const Eigen::VectorXd& successes,
                         const Eigen::VectorXd& offset, const Eigen::VectorXd& start, const LogisticOptions& opt) {
    const double wsum = weight.sum();
    if (!(wsum > 0.0)) {
        throw InvalidInput("glm", "logistic regression needs positive total weight");
    }
    LogisticFit fit;
    fit.coef = start;
    fit.loss = mean_loss(X, weight, successes, offset, fit.coef, wsum);
    for (int it = 0;; ++it) {
        const Eigen::VectorXd eta = X * fit.coef + offset;
        Eigen::VectorXd resid(eta.size()), curv(eta.size());
        for (Eigen::Index r = 0; r < eta.size(); ++r) {
            resid[r] = (weight[r] * Loss::mean(eta[r]) - successes[r]) / wsum;
            curv[r] = weight[r] * Loss::variance(eta[r]) / wsum;
        }
        const Eigen::VectorXd grad = X.transpose() * resid;
        fit.gradient_norm = grad.size() ? grad.lpNorm<Eigen::Infinity>() : 0.0;
        fit.iterations = it;
        if (fit.gradient_norm <= opt.gradient_tol) {
            fit.converged = true;
            break;
        }
        if (it >= opt.max_iter) {
            break;
        }
        Eigen::MatrixXd hess = X.transpose() * curv.asDiagonal() * X;
        Eigen::LLT<Eigen::MatrixXd> llt(hess);
        if (llt.info() != Eigen::Success) {
            hess.diagonal().array() += opt.ridge;
            llt.compute(hess);
            if (llt.info() != Eigen::Success) {
                throw InvalidInput("glm", "Newton system is singular even after ridge damping");
            }
        }
        const Eigen::VectorXd dir = -llt.solve(grad);
        bool improved = false;
        for (double t = 1.0; t > 1e-12; t *= 0.5) {
            const Eigen::VectorXd trial = fit.coef + t * dir;
            const double f = mean_loss(X, weight, successes, offset, trial, wsum);
            if (f < fit.loss) {
                fit.coef = trial;
                fit.loss = f;
                improved = true;
                break;
            }
        }
        if (!improved) {
            // No representable decrease left along the Newton direction.
            fit.converged = fit.gradient_norm <= 1e3 * opt.gradient_tol;
            break;
        }
    }
    return fit;
}

}  // namespace hotspot

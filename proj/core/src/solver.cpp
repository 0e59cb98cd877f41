#include "hotspot/solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "hotspot/error.hpp"
#include "hotspot/glm.hpp"
#include "hotspot/loss.hpp"
#include "hotspot/objective.hpp"
#include "hotspot/stats.hpp"
#include "hotspot/tuning.hpp"

namespace hotspot {

namespace {

constexpr double kGammaBracket = 30.0;

void validate_graph(const Dataset& ds, const FusionGraph& g) {
    if (!g.empty() && g.num_nodes() != ds.num_regions()) {
        throw InvalidInput("solver", "fusion graph has " + std::to_string(g.num_nodes()) +
                                         " nodes but the dataset has " + std::to_string(ds.num_regions()) +
                                         " regions");
    }
}

// Minimizes a convex function on [0, 1] by golden-section search.
template <class F>
double golden_section(F&& f, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0, hi = 1.0;
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > tol) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? x1 : x2;
}

}  // namespace

void SolverConfig::validate() const {
    if (!(outer_tol > 0.0) || !(alpha_newton_tol > 0.0) || !(line_search_tol > 0.0) ||
        !(gamma_root_tol > 0.0) || !(fuse.tol > 0.0) || !(merge_tol >= 0.0)) {
        throw InvalidInput("solver", "all tolerances must be positive");
    }
    if (max_outer_iter < 1 || alpha_max_newton_iter < 1 || fuse.max_iter < 1) {
        throw InvalidInput("solver", "iteration limits must be positive");
    }
    if (gamma_grid_size < 3) {
        throw InvalidInput("solver", "gamma grid size must be at least 3");
    }
}

Eigen::VectorXd alpha_step(const Dataset& ds, const ModelParams& params, const SolverConfig& cfg) {
    check_dimensions(ds, params);
    if (ds.alpha_dim() == 0) {
        return Eigen::VectorXd(0);
    }
    const auto& pt = ds.patterns();
    Eigen::VectorXd offset(static_cast<Eigen::Index>(pt.size()));
    for (std::size_t r = 0; r < pt.size(); ++r) {
        const auto i = static_cast<Eigen::Index>(pt.region[r]);
        offset[static_cast<Eigen::Index>(r)] = params.beta[i] + params.gamma[i];
    }
    LogisticOptions opt;
    opt.gradient_tol = cfg.alpha_newton_tol;
    opt.max_iter = cfg.alpha_max_newton_iter;
    return fit_logistic(pt.design, pt.weight, pt.successes, offset, params.alpha, opt).coef;
}

QuadCoefficients beta_quad_coeffs(const Dataset& ds, const ModelParams& params) {
    check_dimensions(ds, params);
    const auto K = static_cast<Eigen::Index>(ds.num_regions());
    const auto& pt = ds.patterns();
    const Eigen::VectorXd eta = linear_predictor(ds, params);
    QuadCoefficients q{Eigen::VectorXd::Zero(K), Eigen::VectorXd::Zero(K)};
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(K);
    for (std::size_t r = 0; r < pt.size(); ++r) {
        const auto rr = static_cast<Eigen::Index>(r);
        const auto i = static_cast<Eigen::Index>(pt.region[r]);
        q.a[i] += pt.weight[rr] * Loss::variance(eta[rr]);
        grad[i] += pt.weight[rr] * Loss::mean(eta[rr]) - pt.successes[rr];
    }
    for (Eigen::Index i = 0; i < K; ++i) {
        const double floor = std::numeric_limits<double>::epsilon() * ds.region_weight(static_cast<std::size_t>(i));
        if (!(q.a[i] > floor)) {
            throw InvalidInput("solver", "degenerate curvature in region '" +
                                             ds.regions()[static_cast<std::size_t>(i)].region_id + "'");
        }
        q.b[i] = params.beta[i] - grad[i] / q.a[i];
    }
    return q;
}

BetaStepResult beta_step(const Dataset& ds, const ModelParams& params, const FusionGraph& graph,
                         const SolverConfig& cfg, const PenaltyConfig& pen, const FuseWarmStart* warm) {
    validate_graph(ds, graph);
    const auto coeffs = beta_quad_coeffs(ds, params);
    QuadFuseProblem problem{coeffs.a, coeffs.b, graph, pen.lambda1, ds.total_weight()};
    if (problem.graph.empty()) {
        problem.graph = FusionGraph(ds.num_regions(), {}, false);
    }
    const FuseSolution sol = solve_quad_fuse(problem, cfg.fuse, warm);

    ModelParams trial = params;
    auto psi = [&](const Eigen::VectorXd& beta) {
        trial.beta = beta;
        return neg_loglik(ds, trial) + fusion_penalty(beta, graph, pen.lambda1);
    };
    const double psi0 = psi(params.beta);

    BetaStepResult out;
    out.fuse_state = sol.state;
    if (psi(sol.beta) <= psi0) {
        out.beta = sol.beta;
        return out;
    }
    const Eigen::VectorXd dir = sol.beta - params.beta;
    const double h = golden_section([&](double s) { return psi(params.beta + s * dir); }, cfg.line_search_tol);
    const Eigen::VectorXd candidate = params.beta + h * dir;
    out.line_searched = true;
    if (psi(candidate) <= psi0) {
        out.beta = candidate;
        out.step = h;
    } else {
        out.beta = params.beta;
        out.step = 0.0;
    }
    return out;
}

UnivariateGammaProblem::UnivariateGammaProblem(std::vector<double> weight, std::vector<double> successes,
                                               std::vector<double> offset, double region_weight)
    : weight_(std::move(weight)),
      successes_(std::move(successes)),
      offset_(std::move(offset)),
      region_weight_(region_weight) {
    if (weight_.size() != successes_.size() || weight_.size() != offset_.size()) {
        throw InvalidInput("solver", "gamma problem arrays differ in length");
    }
}

double UnivariateGammaProblem::loss(double t) const {
    double s = 0.0;
    for (std::size_t k = 0; k < weight_.size(); ++k) {
        const double eta = t + offset_[k];
        s += weight_[k] * Loss::cumulant(eta) - successes_[k] * eta;
    }
    return s;
}

double UnivariateGammaProblem::loss_derivative(double t) const {
    double s = 0.0;
    for (std::size_t k = 0; k < weight_.size(); ++k) {
        s += weight_[k] * Loss::mean(t + offset_[k]) - successes_[k];
    }
    return s;
}

double UnivariateGammaProblem::loss_curvature(double t) const {
    double s = 0.0;
    for (std::size_t k = 0; k < weight_.size(); ++k) {
        s += weight_[k] * Loss::variance(t + offset_[k]);
    }
    return s;
}

double UnivariateGammaProblem::value(double t, double lambda) const {
    return loss(t) + region_weight_ * hard_penalty(t, lambda);
}

double UnivariateGammaProblem::unpenalized_minimizer(double tol) const {
    double lo = -kGammaBracket, hi = kGammaBracket;
    if (loss_derivative(lo) >= 0.0) return lo;
    if (loss_derivative(hi) <= 0.0) return hi;
    double t = 0.0;
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double g = loss_derivative(t);
        if (g == 0.0) return t;
        (g > 0.0 ? hi : lo) = t;
        const double h = loss_curvature(t);
        double next = h > 0.0 ? t - g / h : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        const bool small = std::abs(next - t) < tol;
        t = next;
        if (small) break;
    }
    return t;
}

double UnivariateGammaProblem::minimize(double lambda, int grid_size, double tol) const {
    double best_t = 0.0;
    double best_v = value(0.0, lambda);
    auto consider = [&](double t) {
        const double v = value(t, lambda);
        const bool better = v < best_v ||
                            (v == best_v && (std::abs(t) < std::abs(best_t) ||
                                             (std::abs(t) == std::abs(best_t) && t > best_t)));
        if (better) {
            best_t = t;
            best_v = v;
        }
    };
    consider(unpenalized_minimizer(tol));
    const int half = (grid_size - 1) / 2;
    for (int k = 0; k < grid_size; ++k) {
        // Symmetric construction keeps 0 and +-lambda exact.
        const double t = grid_size % 2 == 1 ? lambda * static_cast<double>(k - half) / half
                                            : -lambda + 2.0 * lambda * k / (grid_size - 1);
        consider(t);
    }

    // Newton polish on the smooth piece holding best_t: (-inf,-lambda], [-lambda,0],
    // [0,lambda] or [lambda,inf). Accepted only if it lowers the value.
    if (best_t != 0.0) {
        double lo, hi;
        if (best_t >= lambda) {
            lo = lambda;
            hi = std::max(lambda, kGammaBracket);
        } else if (best_t <= -lambda) {
            lo = std::min(-lambda, -kGammaBracket);
            hi = -lambda;
        } else if (best_t > 0.0) {
            lo = 0.0;
            hi = lambda;
        } else {
            lo = -lambda;
            hi = 0.0;
        }
        const bool inner = std::abs(best_t) < lambda;
        double t = best_t;
        for (int it = 0; it < 20; ++it) {
            const double sgn = t > 0.0 ? 1.0 : -1.0;
            const double d1 = loss_derivative(t) + (inner ? region_weight_ * (lambda * sgn - t) : 0.0);
            const double d2 = loss_curvature(t) - (inner ? region_weight_ : 0.0);
            if (!(d2 > 0.0)) break;
            const double next = std::clamp(t - d1 / d2, lo, hi);
            if (std::abs(next - t) < tol) {
                t = next;
                break;
            }
            t = next;
        }
        if (value(t, lambda) < best_v) {
            best_t = t;
        }
    }
    return best_t;
}

UnivariateGammaProblem gamma_problem(const Dataset& ds, const ModelParams& params, std::size_t region) {
    check_dimensions(ds, params);
    const auto& pt = ds.patterns();
    const auto begin = pt.region_begin[region], end = pt.region_begin[region + 1];
    std::vector<double> w, s, nu;
    w.reserve(end - begin);
    s.reserve(end - begin);
    nu.reserve(end - begin);
    const double b = params.beta[static_cast<Eigen::Index>(region)];
    for (auto r = begin; r < end; ++r) {
        const auto rr = static_cast<Eigen::Index>(r);
        w.push_back(pt.weight[rr]);
        s.push_back(pt.successes[rr]);
        nu.push_back(pt.design.row(rr).dot(params.alpha) + b);
    }
    return UnivariateGammaProblem(std::move(w), std::move(s), std::move(nu), ds.region_weight(region));
}

Eigen::VectorXd gamma_step(const Dataset& ds, const ModelParams& params, const SolverConfig& cfg,
                           const PenaltyConfig& pen) {
    const auto K = ds.num_regions();
    Eigen::VectorXd gamma(static_cast<Eigen::Index>(K));
    for (std::size_t i = 0; i < K; ++i) {
        gamma[static_cast<Eigen::Index>(i)] =
            gamma_problem(ds, params, i).minimize(pen.lambda2, cfg.gamma_grid_size, cfg.gamma_root_tol);
    }
    return gamma;
}

ModelParams default_init(const Dataset& ds) {
    auto p = ModelParams::zeros(ds.alpha_dim(), ds.num_regions());
    for (std::size_t i = 0; i < ds.num_regions(); ++i) {
        p.beta[static_cast<Eigen::Index>(i)] = logit(std::clamp(ds.crude_rate(i), 0.01, 0.99));
    }
    return p;
}

FitResult fit(const Dataset& ds, const FusionGraph& graph, const PenaltyConfig& pen, const SolverConfig& cfg,
              const std::optional<ModelParams>& init, const FuseWarmStart* warm) {
    cfg.validate();
    pen.validate();
    validate_graph(ds, graph);

    FitResult res;
    res.params = init ? *init : default_init(ds);
    check_dimensions(ds, res.params);
    if (!res.params.all_finite()) {
        throw InvalidInput("solver", "initial parameters must be finite");
    }
    if (warm) res.fuse_state = *warm;

    double phi = objective(ds, res.params, graph, pen);
    res.objective_trace.push_back(phi);

    // Commits a block update only if the objective does not rise.
    auto commit = [&](ModelParams candidate) {
        const double value = objective(ds, candidate, graph, pen);
        if (value <= phi) {
            res.params = std::move(candidate);
            phi = value;
        }
        assert(res.objective_trace.empty() || phi <= res.objective_trace.back());
        res.objective_trace.push_back(phi);
    };

    for (int it = 1; it <= cfg.max_outer_iter; ++it) {
        const double previous = phi;
        if (cfg.update_alpha) {
            ModelParams c = res.params;
            c.alpha = alpha_step(ds, res.params, cfg);
            commit(std::move(c));
        }
        if (cfg.update_beta) {
            const auto* w = res.fuse_state.subgradient.size() > 0 ? &res.fuse_state : nullptr;
            auto step = beta_step(ds, res.params, graph, cfg, pen, w);
            res.fuse_state = std::move(step.fuse_state);
            ModelParams c = res.params;
            c.beta = std::move(step.beta);
            commit(std::move(c));
        }
        if (cfg.update_gamma) {
            ModelParams c = res.params;
            c.gamma = gamma_step(ds, res.params, cfg, pen);
            commit(std::move(c));
        }
        res.outer_iterations = it;
        if (std::abs(phi - previous) / std::max(1.0, std::abs(previous)) <= cfg.outer_tol) {
            res.converged = true;
            break;
        }
    }

    res.df = degrees_of_freedom(res.params, cfg.merge_tol);
    res.bic = bic_star(ds, res.params, res.df);
    return res;
}

}  // namespace hotspot

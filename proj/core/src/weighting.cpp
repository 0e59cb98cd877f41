#include "hotspot/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hotspot/error.hpp"
#include "hotspot/format.hpp"
#include "hotspot/glm.hpp"
#include "hotspot/stats.hpp"

namespace hotspot {

namespace {

std::string cell_name(const std::vector<std::string>& names, const std::vector<double>& cell) {
    std::ostringstream os;
    for (std::size_t k = 0; k < cell.size(); ++k) {
        if (k) os << ", ";
        os << names[k] << '=' << format_double(cell[k]);
    }
    return "(" + os.str() + ")";
}

// Column of each named covariate within the design row Q = (Z, X).
std::vector<std::size_t> covariate_columns(const Dataset& ds, const std::vector<std::string>& names) {
    std::vector<std::size_t> cols;
    for (const auto& n : names) {
        const auto& zs = ds.subject_covariate_names();
        const auto& xs = ds.region_covariate_names();
        if (auto it = std::find(zs.begin(), zs.end(), n); it != zs.end()) {
            cols.push_back(static_cast<std::size_t>(it - zs.begin()));
        } else if (auto jt = std::find(xs.begin(), xs.end(), n); jt != xs.end()) {
            cols.push_back(ds.subject_dim() + static_cast<std::size_t>(jt - xs.begin()));
        } else {
            throw InvalidInput("weighting", "stratifying covariate '" + n + "' is not in the dataset");
        }
    }
    return cols;
}

}  // namespace

void StrataTargets::validate() const {
    if (covariates.empty()) throw InvalidInput("weighting", "targets name no stratifying covariates");
    if (proportions.empty()) throw InvalidInput("weighting", "targets contain no cells");
    KahanSum total;
    for (const auto& [cell, p] : proportions) {
        if (cell.size() != covariates.size()) {
            throw InvalidInput("weighting", "target cell has " + std::to_string(cell.size()) + " values, expected " +
                                                std::to_string(covariates.size()));
        }
        if (!(p > 0.0) || !std::isfinite(p)) {
            throw InvalidInput("weighting", "target cell " + cell_name(covariates, cell) +
                                                " must have a positive proportion");
        }
        total.add(p);
    }
    if (std::abs(total.value() - 1.0) > 1e-9) {
        throw InvalidInput("weighting", "target proportions sum to " + format_double(total.value()) + ", not 1");
    }
}

std::vector<double> fit_missingness_model(const Dataset& ds, const MissingnessOptions& opt) {
    const auto& subjects = ds.subjects();
    const std::size_t n = subjects.size();
    const std::size_t q = ds.alpha_dim();
    for (auto [a, b] : opt.interactions) {
        if (a >= q || b >= q) throw InvalidInput("weighting", "interaction term refers to a missing covariate");
    }
    const std::size_t cols = 1 + q + opt.interactions.size();
    std::size_t observed = 0;
    for (const auto& s : subjects) observed += s.observed == 1;
    if (observed == 0 || observed == n) {
        throw InvalidInput("weighting", "missingness model needs both observed and unobserved subjects");
    }

    // Aggregate identical design rows: the fit only depends on counts per row.
    std::map<std::vector<double>, std::pair<double, double>> agg;
    std::vector<std::vector<double>> rows(n);
    for (std::size_t j = 0; j < n; ++j) {
        const Eigen::VectorXd Q = ds.design_row(j);
        std::vector<double> r(cols);
        r[0] = 1.0;
        for (std::size_t k = 0; k < q; ++k) r[1 + k] = Q[static_cast<Eigen::Index>(k)];
        for (std::size_t k = 0; k < opt.interactions.size(); ++k) {
            const auto [a, b] = opt.interactions[k];
            r[1 + q + k] = Q[static_cast<Eigen::Index>(a)] * Q[static_cast<Eigen::Index>(b)];
        }
        auto& cell = agg[r];
        cell.first += 1.0;
        cell.second += subjects[j].observed;
        rows[j] = std::move(r);
    }
    const auto m = static_cast<Eigen::Index>(agg.size());
    Eigen::MatrixXd X(m, static_cast<Eigen::Index>(cols));
    Eigen::VectorXd w(m), s(m);
    Eigen::Index r = 0;
    for (const auto& [row, ws] : agg) {
        for (std::size_t k = 0; k < cols; ++k) X(r, static_cast<Eigen::Index>(k)) = row[k];
        w[r] = ws.first;
        s[r] = ws.second;
        ++r;
    }
    LogisticOptions lo;
    lo.gradient_tol = opt.gradient_tol;
    lo.max_iter = opt.max_iter;
    const auto fitted = fit_logistic(X, w, s, Eigen::VectorXd::Zero(m),
                                     Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cols)), lo);
    const Eigen::VectorXd eta = X * fitted.coef;
    // Under (quasi-)complete separation the MLE runs off to infinity; the
    // linear predictor blowing up is the symptom that survives finite iterations.
    if (!fitted.converged || eta.lpNorm<Eigen::Infinity>() > 15.0) {
        throw InvalidInput("weighting",
                           "missingness model shows complete separation (some covariate cells are all observed "
                           "or all missing); coarsen the covariates or drop interaction terms");
    }
    std::map<std::vector<double>, double> prob;
    r = 0;
    for (const auto& kv : agg) prob[kv.first] = expit(eta[r++]);
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = prob.at(rows[j]);
    return out;
}

IpwResult inverse_probability_weights(std::span<const double> probs, std::span<const int> observed,
                                      double cap_quantile) {
    if (probs.size() != observed.size()) {
        throw InvalidInput("weighting", "probability and observation vectors differ in length");
    }
    if (!(cap_quantile > 0.0 && cap_quantile <= 1.0)) {
        throw InvalidInput("weighting", "cap quantile must be in (0, 1]");
    }
    IpwResult res;
    res.weights.assign(probs.size(), 1.0);
    std::vector<double> raw;
    for (std::size_t j = 0; j < probs.size(); ++j) {
        if (!(probs[j] > 0.0 && probs[j] < 1.0)) {
            throw InvalidInput("weighting", "observation probability of subject " + std::to_string(j) +
                                                " is outside (0, 1)");
        }
        if (observed[j]) {
            res.weights[j] = 1.0 / probs[j];
            raw.push_back(res.weights[j]);
        }
    }
    if (raw.empty()) return res;
    res.cap = quantile(raw, cap_quantile);
    for (std::size_t j = 0; j < probs.size(); ++j) {
        if (observed[j] && res.weights[j] > res.cap) {
            res.weights[j] = res.cap;
            ++res.num_capped;
        }
    }
    return res;
}

std::vector<double> post_stratification_factors(const Dataset& ds, std::span<const double> ipw,
                                                const StrataTargets& targets) {
    targets.validate();
    const auto& subjects = ds.subjects();
    if (ipw.size() != subjects.size()) throw InvalidInput("weighting", "ipw vector length mismatch");
    const auto cols = covariate_columns(ds, targets.covariates);

    std::vector<std::vector<double>> cells(subjects.size());
    std::map<std::vector<double>, KahanSum> mass;
    KahanSum total;
    for (std::size_t j = 0; j < subjects.size(); ++j) {
        const Eigen::VectorXd Q = ds.design_row(j);
        for (auto c : cols) cells[j].push_back(Q[static_cast<Eigen::Index>(c)]);
        if (subjects[j].observed) {
            mass[cells[j]].add(ipw[j]);
            total.add(ipw[j]);
        }
    }
    for (const auto& [cell, m] : mass) {
        if (!targets.proportions.count(cell)) {
            throw InvalidInput("weighting", "sample cell " + cell_name(targets.covariates, cell) +
                                                " has no target proportion");
        }
    }
    std::map<std::vector<double>, double> factor;
    for (const auto& [cell, p] : targets.proportions) {
        auto it = mass.find(cell);
        if (it == mass.end() || !(it->second.value() > 0.0)) {
            throw InvalidInput("weighting", "target cell " + cell_name(targets.covariates, cell) +
                                                " has no observed subjects");
        }
        factor[cell] = p / (it->second.value() / total.value());
    }
    std::vector<double> out(subjects.size(), 1.0);
    for (std::size_t j = 0; j < subjects.size(); ++j) {
        if (auto it = factor.find(cells[j]); it != factor.end()) out[j] = it->second;
    }
    return out;
}

WeightReport build_final_weights(const Dataset& ds, const std::optional<StrataTargets>& targets,
                                 double cap_quantile, const MissingnessOptions& options) {
    const auto& subjects = ds.subjects();
    const std::size_t n = subjects.size();
    std::vector<int> observed(n);
    for (std::size_t j = 0; j < n; ++j) observed[j] = subjects[j].observed;

    std::vector<double> ipw(n, 1.0);
    double cap = 1.0;
    std::size_t capped = 0;
    if (ds.num_observed() < n) {
        const auto probs = fit_missingness_model(ds, options);
        auto r = inverse_probability_weights(probs, observed, cap_quantile);
        ipw = std::move(r.weights);
        cap = r.cap;
        capped = r.num_capped;
    }
    std::vector<double> factor(n, 1.0);
    if (targets) factor = post_stratification_factors(ds, ipw, *targets);

    std::vector<double> final_w(n);
    std::vector<double> obs_w;
    for (std::size_t j = 0; j < n; ++j) {
        final_w[j] = ipw[j] * factor[j];
        if (observed[j]) obs_w.push_back(final_w[j]);
    }
    WeightSummary sum;
    if (!obs_w.empty()) {
        sum = {*std::min_element(obs_w.begin(), obs_w.end()), quantile(obs_w, 0.05), quantile(obs_w, 0.5),
               quantile(obs_w, 0.95), *std::max_element(obs_w.begin(), obs_w.end())};
    }
    Dataset weighted = ds.with_weights(final_w);
    return WeightReport{std::move(ipw), std::move(factor), std::move(final_w), sum, capped, cap, std::move(weighted)};
}

}  // namespace hotspot

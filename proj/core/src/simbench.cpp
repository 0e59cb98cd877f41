#include "hotspot/simbench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <optional>
#include <regex>
#include <string_view>

#include "hotspot/error.hpp"
#include "hotspot/format.hpp"
#include "hotspot/glm.hpp"
#include "hotspot/objective.hpp"
#include "hotspot/parallel.hpp"
#include "hotspot/rng.hpp"
#include "hotspot/stats.hpp"

namespace hotspot {

int Scenario::num_outliers() const {
    return static_cast<int>(std::lround(num_regions * outlier_fraction));
}

std::string Scenario::name() const {
    std::string s = "K" + std::to_string(num_regions) + "n" + std::to_string(subjects_per_region);
    const long pct = std::lround(outlier_fraction * 100.0);
    if (pct != 0) s += "o" + std::to_string(pct);
    return s;
}

void Scenario::validate() const {
    if (num_regions < 2) throw InvalidInput("simbench", "scenario needs at least 2 regions");
    if (subjects_per_region < 2) throw InvalidInput("simbench", "scenario needs at least 2 subjects per region");
    if (!(outlier_fraction >= 0.0 && outlier_fraction <= 1.0)) {
        throw InvalidInput("simbench", "outlier fraction must lie in [0, 1]");
    }
    if (std::abs(num_regions * outlier_fraction - num_outliers()) > 1e-9) {
        throw InvalidInput("simbench", "K * outlier_fraction must be an integer");
    }
    if (replications < 1) throw InvalidInput("simbench", "replications must be positive");
}

Scenario Scenario::parse(const std::string& name) {
    static const std::regex re(R"(K(\d+)n(\d+)(?:o(\d+))?)");
    std::smatch m;
    if (!std::regex_match(name, m, re)) {
        throw InvalidInput("simbench", "cannot parse scenario '" + name + "' (expected e.g. K20n50 or K40n100o15)");
    }
    Scenario s;
    s.num_regions = std::stoi(m[1]);
    s.subjects_per_region = std::stoi(m[2]);
    s.outlier_fraction = m[3].matched ? std::stoi(m[3]) / 100.0 : 0.0;
    s.validate();
    return s;
}

namespace {

double trend_level(double s) {
    if (s < 35.0) return logit(0.4);
    if (s < 65.0) return logit(0.5);
    return logit(0.6);
}

}  // namespace

GeneratedInstance generate(const Scenario& sc, int replicate) {
    sc.validate();
    CounterRng rng(sc.seed, {hash_name(sc.name()), static_cast<std::uint64_t>(sc.spatial_trend),
                             static_cast<std::uint64_t>(replicate)});
    const auto K = static_cast<std::size_t>(sc.num_regions);
    const auto n = static_cast<std::size_t>(sc.subjects_per_region);

    std::vector<double> S(K);
    for (std::size_t i = 0; i < K; ++i) {
        do {
            S[i] = rng.uniform(5.0, 95.0);
        } while (std::find(S.begin(), S.begin() + static_cast<std::ptrdiff_t>(i), S[i]) !=
                 S.begin() + static_cast<std::ptrdiff_t>(i));
    }
    std::vector<int> X(K);
    for (auto& x : X) x = rng.bernoulli(0.5);

    ModelParams truth = ModelParams::zeros(2, K);
    truth.alpha << sc.alpha1, sc.alpha2;
    for (std::size_t i = 0; i < K; ++i) {
        truth.beta[static_cast<Eigen::Index>(i)] = sc.spatial_trend ? trend_level(S[i]) : 0.0;
    }
    // Partial Fisher-Yates picks the outlier regions uniformly.
    std::vector<std::size_t> perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    const auto KO = static_cast<std::size_t>(sc.num_outliers());
    for (std::size_t k = 0; k < KO; ++k) {
        std::swap(perm[k], perm[k + rng.below(K - k)]);
    }
    std::vector<bool> outlier(K, false);
    for (std::size_t k = 0; k < KO; ++k) {
        truth.gamma[static_cast<Eigen::Index>(perm[k])] = k < KO / 2 ? sc.outlier_magnitude : -sc.outlier_magnitude;
        outlier[perm[k]] = true;
    }

    std::vector<RegionRecord> regions(K);
    std::vector<SubjectRecord> subjects;
    subjects.reserve(K * n);
    std::vector<double> prevalence(K);
    for (std::size_t i = 0; i < K; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        regions[i] = {"r" + std::to_string(i + 1), {S[i]}, {static_cast<double>(X[i])}};
        const double base = sc.alpha2 * X[i] + truth.beta[ii] + truth.gamma[ii];
        prevalence[i] = 0.5 * expit(base) + 0.5 * expit(sc.alpha1 + base);
        std::vector<int> Z(n);
        for (auto& z : Z) z = rng.bernoulli(0.5);
        std::vector<int> Y(n);
        // A region whose outcomes are all equal violates the dataset invariant; redraw its outcomes.
        for (int attempt = 0;; ++attempt) {
            int total = 0;
            for (std::size_t j = 0; j < n; ++j) {
                Y[j] = rng.bernoulli(expit(sc.alpha1 * Z[j] + base));
                total += Y[j];
            }
            if (total > 0 && total < static_cast<int>(n)) break;
            if (attempt >= 1000) {
                throw InvalidInput("simbench", "could not draw a non-degenerate region " + regions[i].region_id);
            }
        }
        for (std::size_t j = 0; j < n; ++j) subjects.push_back({i, Y[j], 1, 1.0, {static_cast<double>(Z[j])}});
    }

    std::vector<FusionEdge> edges;
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = i + 1; j < K; ++j) edges.push_back({i, j, 1.0 / std::abs(S[i] - S[j])});
    }
    return GeneratedInstance{Dataset(std::move(regions), std::move(subjects), {"z1"}, {"x1"}),
                             FusionGraph(K, std::move(edges)),
                             std::move(truth),
                             std::move(S),
                             std::move(prevalence),
                             std::move(outlier)};
}

double mcc(long long tp, long long tn, long long fp, long long fn) {
    const double d1 = static_cast<double>(tp + fp), d2 = static_cast<double>(tp + fn);
    const double d3 = static_cast<double>(tn + fp), d4 = static_cast<double>(tn + fn);
    if (d1 == 0.0 || d2 == 0.0 || d3 == 0.0 || d4 == 0.0) return 0.0;
    const double num = static_cast<double>(tp) * static_cast<double>(tn) - static_cast<double>(fp) * static_cast<double>(fn);
    return num / std::sqrt(d1 * d2 * d3 * d4);
}

ReplicationMetrics evaluate_flags(const GeneratedInstance& inst, const std::vector<bool>& flags) {
    if (flags.size() != inst.outlier.size()) throw InvalidInput("simbench", "flag vector length mismatch");
    ReplicationMetrics m;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (flags[i] && inst.outlier[i]) ++m.tp;
        else if (flags[i]) ++m.fp;
        else if (inst.outlier[i]) ++m.fn;
        else ++m.tn;
    }
    m.mcc = mcc(m.tp, m.tn, m.fp, m.fn);
    return m;
}

ReplicationMetrics evaluate_fit(const GeneratedInstance& inst, const ModelParams& fit) {
    const Dataset& ds = inst.data;
    check_dimensions(ds, fit);
    std::vector<bool> flags(ds.num_regions());
    for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = fit.gamma[static_cast<Eigen::Index>(i)] != 0.0;
    ReplicationMetrics m = evaluate_flags(inst, flags);
    m.bias_alpha1 = fit.alpha[0] - inst.truth.alpha[0];
    m.bias_alpha2 = fit.alpha[1] - inst.truth.alpha[1];
    KahanSum sp, sb;
    for (std::size_t i = 0; i < ds.num_regions(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        KahanSum ph;
        for (auto j : ds.members(i)) {
            ph.add(expit(ds.design_row(j).dot(fit.alpha) + fit.beta[ii] + fit.gamma[ii]));
        }
        const double phat = ph.value() / static_cast<double>(ds.region_size(i));
        sp.add((phat - inst.prevalence[i]) * (phat - inst.prevalence[i]));
        const double db = fit.beta[ii] - inst.truth.beta[ii];
        sb.add(db * db);
    }
    const auto K = static_cast<double>(ds.num_regions());
    m.rmse_p = std::sqrt(sp.value() / K);
    m.rmse_beta = std::sqrt(sb.value() / K);
    return m;
}

std::vector<bool> residual_baseline_detect(const Dataset& ds, double threshold_sd) {
    const auto& pt = ds.patterns();
    const auto rows = static_cast<Eigen::Index>(pt.size());
    Eigen::MatrixXd X(rows, pt.design.cols() + 1);
    X.col(0).setOnes();
    X.rightCols(pt.design.cols()) = pt.design;
    const auto fitted = fit_logistic(X, pt.weight, pt.successes, Eigen::VectorXd::Zero(rows),
                                     Eigen::VectorXd::Zero(X.cols()));
    std::vector<bool> flags(ds.num_regions(), false);
    const auto& subjects = ds.subjects();
    for (std::size_t i = 0; i < ds.num_regions(); ++i) {
        KahanSum num, var;
        for (auto j : ds.members(i)) {
            const auto& s = subjects[j];
            if (!s.observed) continue;
            const double p = expit(fitted.coef[0] + ds.design_row(j).dot(fitted.coef.tail(X.cols() - 1)));
            num.add(s.weight * (s.outcome - p));
            var.add(s.weight * s.weight * p * (1.0 - p));
        }
        const double z = num.value() / std::sqrt(var.value());
        flags[i] = std::abs(z) > threshold_sd;
    }
    return flags;
}

const char* method_name(Method m) {
    switch (m) {
        case Method::proposed: return "proposed";
        case Method::oracle_alpha: return "oracle_alpha";
        case Method::oracle_beta: return "oracle_beta";
        case Method::oracle_gamma: return "oracle_gamma";
        case Method::residual_baseline: return "residual_baseline";
    }
    return "unknown";
}

namespace {

using MetricList = std::vector<std::pair<const char*, double>>;

MetricList metrics_for(Method m, const ReplicationMetrics& r) {
    switch (m) {
        case Method::proposed:
            return {{"bias_alpha1", r.bias_alpha1}, {"bias_alpha2", r.bias_alpha2}, {"rmse_p", r.rmse_p},
                    {"rmse_beta", r.rmse_beta}, {"mcc", r.mcc}};
        case Method::oracle_alpha:
            return {{"bias_alpha1", r.bias_alpha1}, {"bias_alpha2", r.bias_alpha2}, {"rmse_p", r.rmse_p}};
        case Method::oracle_beta: return {{"rmse_p", r.rmse_p}, {"rmse_beta", r.rmse_beta}};
        case Method::oracle_gamma: return {{"rmse_p", r.rmse_p}, {"mcc", r.mcc}};
        case Method::residual_baseline: return {{"mcc", r.mcc}};
    }
    return {};
}

ReplicationMetrics run_method(Method m, const GeneratedInstance& inst, const TuningGrid& grid,
                              const SolverConfig& cfg, const StudyOptions& opt) {
    const Dataset& ds = inst.data;
    switch (m) {
        case Method::proposed: {
            const auto t = tune(ds, std::vector<LabeledGraph>{{0, inst.graph}}, grid, cfg);
            return evaluate_fit(inst, t.best.params);
        }
        case Method::oracle_alpha: {
            SolverConfig c = cfg;
            c.update_beta = c.update_gamma = false;
            ModelParams init = inst.truth;
            init.alpha.setZero();
            const auto f = fit(ds, inst.graph, PenaltyConfig{grid.lambda1_values.front(), grid.lambda2_values.front()},
                               c, init);
            if (!f.converged) throw NonConvergence("simbench", "oracle alpha fit did not converge");
            return evaluate_fit(inst, f.params);
        }
        case Method::oracle_beta: {
            SolverConfig c = cfg;
            c.update_alpha = c.update_gamma = false;
            TuningGrid g = grid;
            g.lambda2_values = {grid.lambda2_values.front()};
            // Fixed blocks sit at truth; beta starts from the crude logits.
            ModelParams init = inst.truth;
            init.beta = default_init(ds).beta;
            const auto t = tune(ds, std::vector<LabeledGraph>{{0, inst.graph}}, g, c, 1, &init);
            return evaluate_fit(inst, t.best.params);
        }
        case Method::oracle_gamma: {
            SolverConfig c = cfg;
            c.update_alpha = c.update_beta = false;
            TuningGrid g = grid;
            g.lambda1_values = {grid.lambda1_values.front()};
            ModelParams init = inst.truth;
            init.gamma.setZero();
            const auto t = tune(ds, std::vector<LabeledGraph>{{0, inst.graph}}, g, c, 1, &init);
            return evaluate_fit(inst, t.best.params);
        }
        case Method::residual_baseline:
            return evaluate_flags(inst, residual_baseline_detect(ds, opt.baseline_threshold_sd));
    }
    return {};
}

}  // namespace

ScenarioReport run_scenario(const Scenario& sc, const TuningGrid& grid, const SolverConfig& cfg,
                            const StudyOptions& opt) {
    sc.validate();
    grid.validate();
    cfg.validate();
    const auto R = static_cast<std::size_t>(sc.replications);
    const auto& methods = opt.methods;
    // results[r][m] holds the metrics or nothing on failure.
    std::vector<std::vector<std::optional<ReplicationMetrics>>> results(
        R, std::vector<std::optional<ReplicationMetrics>>(methods.size()));
    parallel_for(R, opt.threads, [&](std::size_t r) {
        std::optional<GeneratedInstance> inst;
        try {
            inst.emplace(generate(sc, static_cast<int>(r)));
        } catch (const Error&) {
            return;
        }
        for (std::size_t m = 0; m < methods.size(); ++m) {
            try {
                results[r][m] = run_method(methods[m], *inst, grid, cfg, opt);
            } catch (const Error&) {
                // counted as a failure below
            }
        }
    });

    ScenarioReport rep;
    rep.scenario = sc;
    for (std::size_t m = 0; m < methods.size(); ++m) {
        int failed = 0;
        for (std::size_t r = 0; r < R; ++r) failed += !results[r][m].has_value();
        rep.failures.emplace_back(method_name(methods[m]), failed);
    }
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t m = 0; m < methods.size(); ++m) {
            if (!results[r][m]) continue;
            for (const auto& [metric, value] : metrics_for(methods[m], *results[r][m])) {
                rep.records.push_back({static_cast<int>(r), method_name(methods[m]), metric, value});
            }
        }
    }
    for (std::size_t m = 0; m < methods.size(); ++m) {
        for (const auto& [metric, unused] : metrics_for(methods[m], ReplicationMetrics{})) {
            (void)unused;
            std::vector<double> v;
            for (std::size_t r = 0; r < R; ++r) {
                if (!results[r][m]) continue;
                for (const auto& [name, value] : metrics_for(methods[m], *results[r][m])) {
                    if (std::string_view(name) == metric) v.push_back(value);
                }
            }
            MetricSummary s{method_name(methods[m]), metric, 0.0, 0.0, 0.0, static_cast<int>(v.size())};
            if (!v.empty()) {
                s.estimate = mean(v);
                const double half = 1.96 * stddev(v) / std::sqrt(static_cast<double>(v.size()));
                s.ci_low = s.estimate - half;
                s.ci_high = s.estimate + half;
            } else {
                s.estimate = s.ci_low = s.ci_high = std::numeric_limits<double>::quiet_NaN();
            }
            rep.summary.push_back(std::move(s));
        }
    }
    return rep;
}

std::vector<ScenarioReport> run_study(const std::vector<Scenario>& scenarios, const TuningGrid& grid,
                                      const SolverConfig& cfg, const StudyOptions& opt) {
    std::vector<ScenarioReport> out;
    out.reserve(scenarios.size());
    for (const auto& sc : scenarios) out.push_back(run_scenario(sc, grid, cfg, opt));
    return out;
}

void write_summary_csv(std::ostream& out, const ScenarioReport& report) {
    out << "method,metric,estimate,ci_low,ci_high\n";
    for (const auto& s : report.summary) {
        out << s.method << ',' << s.metric << ',' << format_double(s.estimate) << ',' << format_double(s.ci_low)
            << ',' << format_double(s.ci_high) << '\n';
    }
}

void write_long_csv(std::ostream& out, const std::vector<ScenarioReport>& reports) {
    out << "scenario,replicate,method,metric,value\n";
    for (const auto& rep : reports) {
        const std::string name = rep.scenario.name();
        for (const auto& r : rep.records) {
            out << name << ',' << r.replicate << ',' << r.method << ',' << r.metric << ',' << format_double(r.value)
                << '\n';
        }
    }
}

const MetricSummary* find_metric(const ScenarioReport& report, const std::string& method, const std::string& metric) {
    for (const auto& s : report.summary) {
        if (s.method == method && s.metric == metric) return &s;
    }
    return nullptr;
}

}  // namespace hotspot

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hotspot/dataset.hpp"
#include "hotspot/graph.hpp"
#include "hotspot/params.hpp"
#include "hotspot/solver.hpp"
#include "hotspot/tuning.hpp"

namespace hotspot {

struct Scenario {
    int num_regions = 20;          // K
    int subjects_per_region = 50;  // n
    double outlier_fraction = 0.0;
    int replications = 100;
    std::uint64_t seed = 1;
    double alpha1 = -0.2;
    double alpha2 = 0.2;
    double outlier_magnitude = 2.0;
    // Piecewise-constant beta over location; false puts every beta at logit(0.5).
    bool spatial_trend = true;

    // Number of outlier regions, round(K * outlier_fraction).
    int num_outliers() const;
    // Canonical name such as "K20n50o10" (o = outlier percentage).
    std::string name() const;
    void validate() const;

    // Parses "K20n50" or "K20n50o15"; replications and seed keep their defaults.
    static Scenario parse(const std::string& name);
};

struct GeneratedInstance {
    Dataset data;
    FusionGraph graph;
    ModelParams truth;
    std::vector<double> location;    // S_i
    std::vector<double> prevalence;  // analytic p_i = E(Y_ij | X_i)
    std::vector<bool> outlier;       // gamma_i != 0
};

GeneratedInstance generate(const Scenario& scenario, int replicate);

struct ReplicationMetrics {
    double bias_alpha1 = 0.0;
    double bias_alpha2 = 0.0;
    double rmse_p = 0.0;
    double rmse_beta = 0.0;
    double mcc = 0.0;
    int tp = 0, tn = 0, fp = 0, fn = 0;
};

// Metrics of fitted params; flags are {i : gamma_i != 0}.
ReplicationMetrics evaluate_fit(const GeneratedInstance& instance, const ModelParams& fit);

// Confusion counts and MCC of arbitrary flags against the planted outliers.
ReplicationMetrics evaluate_flags(const GeneratedInstance& instance, const std::vector<bool>& flags);

// 0 when any denominator factor is 0.
double mcc(long long tp, long long tn, long long fp, long long fn);

// Covariate-only logistic fit (with intercept), then per region the
// standardized weighted residual sum z_i = sum w (y - p) / sqrt(sum w^2 p (1 - p));
// flags |z_i| > threshold_sd.
std::vector<bool> residual_baseline_detect(const Dataset& ds, double threshold_sd = 2.5);

enum class Method { proposed, oracle_alpha, oracle_beta, oracle_gamma, residual_baseline };
const char* method_name(Method m);

struct StudyOptions {
    std::vector<Method> methods{Method::proposed, Method::oracle_alpha, Method::oracle_beta, Method::oracle_gamma,
                                Method::residual_baseline};
    double baseline_threshold_sd = 2.5;
    int threads = 1;
};

struct MetricSummary {
    std::string method;
    std::string metric;
    double estimate = 0.0;  // mean over successful replications
    double ci_low = 0.0;    // mean -/+ 1.96 sd / sqrt(R)
    double ci_high = 0.0;
    int replications = 0;
};

struct ReplicationRecord {
    int replicate = 0;
    std::string method;
    std::string metric;
    double value = 0.0;
};

struct ScenarioReport {
    Scenario scenario;
    std::vector<MetricSummary> summary;
    std::vector<ReplicationRecord> records;  // long format, ordered by replicate then method
    std::vector<std::pair<std::string, int>> failures;  // per method
};

ScenarioReport run_scenario(const Scenario& scenario, const TuningGrid& grid, const SolverConfig& cfg,
                            const StudyOptions& options = {});

std::vector<ScenarioReport> run_study(const std::vector<Scenario>& scenarios, const TuningGrid& grid,
                                      const SolverConfig& cfg, const StudyOptions& options = {});

// method,metric,estimate,ci_low,ci_high
void write_summary_csv(std::ostream& out, const ScenarioReport& report);
// scenario,replicate,method,metric,value
void write_long_csv(std::ostream& out, const std::vector<ScenarioReport>& reports);

const MetricSummary* find_metric(const ScenarioReport& report, const std::string& method, const std::string& metric);

}  // namespace hotspot

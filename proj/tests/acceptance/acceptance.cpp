// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.
// Tolerances below are fixed; do not loosen them to make a run pass.

#include <chrono>
#include <cstdlib>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "hotspot/graphfuse.hpp"
#include "hotspot/objective.hpp"
#include "hotspot/simbench.hpp"
#include "hotspot/solver.hpp"
#include "hotspot/stats.hpp"
#include "hotspot/tuning.hpp"
#include "hotspot/weighting.hpp"
#include "hotspot_cli/commands.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace hotspot;
namespace fs = std::filesystem;

namespace {

constexpr double kDescentTol = 1e-10;
constexpr double kGammaObjectiveTol = 1e-6;
constexpr double kGammaGridStep = 1e-4;
constexpr double kFuseParamTol = 1e-4;
constexpr double kGradientRelTol = 1e-6;
constexpr double kBiasAlphaBand = 0.02;
constexpr double kRmsePLow = 0.03, kRmsePHigh = 0.08;
constexpr double kOracleRmseLow = 0.010, kOracleRmseHigh = 0.025;
// Pilot (default grid, 100 replications): proposed MCC about 0.82 at K40n100o15.
constexpr double kSoftMcc = 0.5;
constexpr double kCellShareTol = 1e-9;
constexpr double kCoverageTarget = 0.95;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int threads() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

Outcome descent() {
    std::mt19937_64 rng(101);
    const auto l1 = TuningGrid::defaults().lambda1_values;
    const auto l2 = TuningGrid::defaults().lambda2_values;
    double worst = -std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t K = 2 + rng() % 19;
        const std::size_t n = 5 + rng() % 46;
        const Dataset ds = testing::random_dataset(rng, K, n, 1 + rng() % 2, rng() % 2, rep % 2 == 1, rep % 3 == 0);
        const FusionGraph g = testing::random_graph(rng, K);
        const PenaltyConfig pen{l1[rng() % l1.size()], l2[rng() % l2.size()]};
        const auto f = fit(ds, g, pen);
        for (std::size_t k = 1; k < f.objective_trace.size(); ++k) {
            worst = std::max(worst, f.objective_trace[k] - f.objective_trace[k - 1]);
        }
    }
    return {worst <= kDescentTol, "largest sub-step increase " + fmt(worst)};
}

Outcome gamma_optimality() {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::normal_distribution<double> N01;
    double worst = -std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < 500; ++rep) {
        oracle::GammaProblem p;
        const int patterns = 1 + static_cast<int>(rng() % 4);
        for (int k = 0; k < patterns; ++k) {
            const double W = 1.0 + std::floor(30.0 * U(rng));
            p.W.push_back(W);
            p.S.push_back(std::floor(U(rng) * (W + 1.0)));
            p.o.push_back(1.5 * N01(rng));
            p.w += W;
        }
        const double lambda = std::ldexp(1.0, -5 + static_cast<int>(rng() % 8));
        const UnivariateGammaProblem g(p.W, p.S, p.o, p.w);
        const double t = g.minimize(lambda, 201);
        const double ref = oracle::dense_grid_min(p, lambda, -12.0, 12.0, kGammaGridStep);
        worst = std::max(worst, p.value(t, lambda) - ref);
    }
    return {worst <= kGammaObjectiveTol, "largest excess over the dense grid " + fmt(worst)};
}

Outcome fuse_oracle() {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::normal_distribution<double> N01;
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t K = 3 + static_cast<std::size_t>(rep % 4);
        QuadFuseProblem p;
        p.a.resize(static_cast<Eigen::Index>(K));
        p.b.resize(static_cast<Eigen::Index>(K));
        for (std::size_t i = 0; i < K; ++i) {
            p.a[static_cast<Eigen::Index>(i)] = 0.5 + 10.0 * U(rng);
            p.b[static_cast<Eigen::Index>(i)] = N01(rng);
        }
        p.graph = testing::random_graph(rng, K, 0.6);
        p.lambda1 = std::ldexp(1.0, -4 + static_cast<int>(rng() % 7));
        p.scale = 1.0 + 20.0 * U(rng);
        const auto sol = solve_quad_fuse(p);
        const auto ref = oracle::quad_fuse(p.a, p.b, p.graph, p.lambda1, p.scale);
        worst = std::max(worst, (sol.beta - ref).lpNorm<Eigen::Infinity>());
    }
    return {worst < kFuseParamTol, "largest parameter gap " + fmt(worst)};
}

Outcome gradient() {
    std::mt19937_64 rng(404);
    double worst = 0.0;
    const double h = 1e-5;
    for (int rep = 0; rep < 100; ++rep) {
        const Dataset ds = testing::random_dataset(rng, 2 + rng() % 6, 5 + rng() % 20, 1 + rng() % 2, rng() % 2,
                                                   rep % 2 == 0, rep % 3 == 0);
        const auto p = testing::random_params(rng, ds);
        const auto g = neg_loglik_grad(ds, p);
        auto check = [&](Eigen::VectorXd ModelParams::*block, const Eigen::VectorXd& analytic) {
            for (Eigen::Index k = 0; k < analytic.size(); ++k) {
                ModelParams a = p, b = p;
                (a.*block)[k] += h;
                (b.*block)[k] -= h;
                const double fd = (neg_loglik(ds, a) - neg_loglik(ds, b)) / (2 * h);
                const double denom = std::max({std::abs(fd), std::abs(analytic[k]), 1e-8});
                worst = std::max(worst, std::abs(analytic[k] - fd) / denom);
            }
        };
        check(&ModelParams::alpha, g.alpha);
        check(&ModelParams::beta, g.beta);
        check(&ModelParams::gamma, g.gamma);
    }
    return {worst < kGradientRelTol, "largest relative error " + fmt(worst)};
}

struct Studies {
    ScenarioReport k20n50;
    ScenarioReport k40n100;
    ScenarioReport k40n100o15;
};

ScenarioReport study(const std::string& name, std::vector<Method> methods) {
    Scenario sc = Scenario::parse(name);
    sc.replications = 100;
    StudyOptions opt;
    opt.methods = std::move(methods);
    opt.threads = threads();
    return run_scenario(sc, TuningGrid::defaults(), SolverConfig{}, opt);
}

double metric(const ScenarioReport& r, const char* method, const char* name) {
    const auto* m = find_metric(r, method, name);
    return m ? m->estimate : std::nan("");
}

std::string failures(const ScenarioReport& r) {
    int total = 0;
    for (const auto& f : r.failures) total += f.second;
    return total ? "; failed replications " + std::to_string(total) : "";
}

Outcome table_one(const Studies& s) {
    const double bias = metric(s.k20n50, "proposed", "bias_alpha1");
    const double rmse = metric(s.k20n50, "proposed", "rmse_p");
    const double oracle = metric(s.k20n50, "oracle_alpha", "rmse_p");
    const bool ok = std::abs(bias) <= kBiasAlphaBand && rmse >= kRmsePLow && rmse <= kRmsePHigh &&
                    oracle >= kOracleRmseLow && oracle <= kOracleRmseHigh;
    return {ok, "bias_alpha1 " + fmt(bias) + ", rmse_p " + fmt(rmse) + ", oracle_alpha rmse_p " + fmt(oracle) +
                    failures(s.k20n50)};
}

Outcome trend(const Studies& s) {
    const double small = metric(s.k20n50, "proposed", "rmse_beta");
    const double large = metric(s.k40n100, "proposed", "rmse_beta");
    return {large < small, "rmse_beta K40n100 " + fmt(large) + " vs K20n50 " + fmt(small) + failures(s.k40n100)};
}

Outcome outliers(const Studies& s, bool& soft_met) {
    const double prop = metric(s.k40n100o15, "proposed", "mcc");
    const double base = metric(s.k40n100o15, "residual_baseline", "mcc");
    soft_met = prop >= kSoftMcc;
    return {prop > base, "MCC proposed " + fmt(prop) + " vs residual baseline " + fmt(base) + "; soft target " +
                             fmt(kSoftMcc) + (soft_met ? " met" : " missed") + failures(s.k40n100o15)};
}

Outcome limits() {
    std::mt19937_64 rng(808);
    int nonzero = 0;
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t K = 3 + rng() % 10;
        const Dataset ds = testing::random_dataset(rng, K, 10 + rng() % 30);
        const auto f = fit(ds, testing::random_graph(rng, K), {std::ldexp(1.0, -4), 1e3});
        nonzero += !f.params.gamma.isZero(0.0);
    }
    int unfused = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const auto inst = generate(Scenario::parse("K20n50o10"), rep);
        const auto f = fit(inst.data, inst.graph, {std::ldexp(1.0, 16), 0.5});
        unfused += fused_groups(f.params.beta).size() != 1;
    }
    return {nonzero == 0 && unfused == 0, std::to_string(nonzero) + "/50 fits with gamma != 0 at lambda2 = 1e3, " +
                                              std::to_string(unfused) + "/20 unfused fits at lambda1 = 2^16"};
}

// Biased sample from a population with known cell structure, then MAR
// missingness; the weighted crude prevalence should cover the population value.
Outcome weighting_criterion() {
    const double sex_pop[2] = {0.5, 0.5};
    const double age_pop[3] = {0.3, 0.4, 0.3};
    const double sex_sample[2] = {0.7, 0.3};
    const double age_sample[3] = {0.5, 0.3, 0.2};
    auto prevalence = [](int s, int a) { return expit(-1.0 + 0.8 * s + 0.6 * a); };
    auto respond = [](int s, int a) { return expit(1.0 - 0.8 * s + 0.5 * a); };
    StrataTargets targets{{"z_sex", "z_age"}, {}};
    double truth = 0.0;
    for (int s = 0; s < 2; ++s) {
        for (int a = 0; a < 3; ++a) {
            targets.proportions[{double(s), double(a)}] = sex_pop[s] * age_pop[a];
            truth += sex_pop[s] * age_pop[a] * prevalence(s, a);
        }
    }
    std::mt19937_64 rng(909);
    std::uniform_real_distribution<double> U;
    int covered = 0;
    double worst_share = 0.0;
    const int runs = 200;
    const std::size_t K = 10;
    for (int run = 0; run < runs; ++run) {
        std::vector<SubjectRecord> subjects;
        std::vector<RegionRecord> regions;
        for (std::size_t i = 0; i < K; ++i) regions.push_back({"g" + std::to_string(i), {double(i)}, {}});
        for (int j = 0; j < 2000; ++j) {
            const int s = U(rng) < sex_sample[1];
            const double ua = U(rng);
            const int a = ua < age_sample[0] ? 0 : ua < age_sample[0] + age_sample[1] ? 1 : 2;
            const int y = U(rng) < prevalence(s, a);
            const int r = U(rng) < respond(s, a);
            subjects.push_back({static_cast<std::size_t>(j) % K, y, r, 1.0, {double(s), double(a)}});
        }
        const Dataset ds(regions, subjects, {"z_sex", "z_age"});
        const auto rep = build_final_weights(ds, targets);
        double sw = 0.0, swy = 0.0;
        std::map<std::vector<double>, double> share;
        for (std::size_t j = 0; j < subjects.size(); ++j) {
            if (!subjects[j].observed) continue;
            sw += rep.final_weight[j];
            swy += rep.final_weight[j] * subjects[j].outcome;
            share[subjects[j].covariates] += rep.final_weight[j];
        }
        for (const auto& [cell, p] : targets.proportions) worst_share = std::max(worst_share, std::abs(share[cell] / sw - p));
        const double est = swy / sw;
        // Linearized standard error of the weighted ratio estimator.
        double v = 0.0;
        for (std::size_t j = 0; j < subjects.size(); ++j) {
            if (!subjects[j].observed) continue;
            const double d = rep.final_weight[j] * (subjects[j].outcome - est);
            v += d * d;
        }
        const double se = std::sqrt(v) / sw;
        covered += std::abs(est - truth) <= 2.0 * se;
    }
    const double coverage = static_cast<double>(covered) / runs;
    return {worst_share <= kCellShareTol && coverage >= kCoverageTarget,
            "largest cell share error " + fmt(worst_share) + ", coverage " + std::to_string(covered) + "/" +
                std::to_string(runs)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / ("hotspot_acceptance_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
    // Data files from a simulated instance with some outcomes missing.
    const auto inst = generate(Scenario::parse("K20n50o10"), 0);
    {
        std::ofstream r(dir / "regions.csv"), s(dir / "subjects.csv"), t(dir / "targets.csv");
        r << "region_id,coord1,coord2,x_1\n";
        for (std::size_t i = 0; i < inst.data.num_regions(); ++i) {
            const auto& reg = inst.data.regions()[i];
            r << reg.region_id << ',' << reg.location[0] << ",0," << reg.covariates[0] << '\n';
        }
        s << "region_id,outcome,observed,z_1\n";
        std::size_t j = 0;
        for (const auto& sj : inst.data.subjects()) {
            // Missingness in both covariate cells, more often when z = 1.
            const bool drop = j % 50 > 1 && (sj.covariates[0] == 1.0 ? j % 7 == 3 : j % 13 == 5);
            s << inst.data.regions()[sj.region_index].region_id << ',' << (drop ? "NA" : std::to_string(sj.outcome))
              << ',' << (drop ? 0 : 1) << ',' << sj.covariates[0] << '\n';
            ++j;
        }
        t << "z_1,proportion\n0,0.5\n1,0.5\n";
    }
    const std::string S = (dir / "subjects.csv").string(), R = (dir / "regions.csv").string(),
                      T = (dir / "targets.csv").string();
    auto path = [&](const std::string& round, const std::string& name) { return (dir / (round + "_" + name)).string(); };
    std::vector<std::string> names;
    auto run_round = [&](const std::string& round) {
        const std::vector<std::vector<std::string>> commands{
            {"--seed", "5", "--lambda1-grid", "0.25,0.0625,0.015625", "--lambda2-grid", "1,0.25", "--neighbor-counts",
             "2,4", "tune", "--subjects", S, "--regions", R, "--targets", T, "--out-table", path(round, "table.csv"),
             "--out-json", path(round, "tune.json"), "--out-report", path(round, "tune_report.csv")},
            {"--seed", "5", "fit", "--subjects", S, "--regions", R, "--ipw", "--lambda1", "0.0625", "--lambda2", "0.5",
             "--out-json", path(round, "fit.json"), "--out-report", path(round, "fit_report.csv")},
            {"--seed", "5", "--threads", "2", "bootstrap", "--subjects", S, "--regions", R, "--ipw", "--fit-json",
             path(round, "fit.json"), "-B", "20", "--out-regions", path(round, "boot.csv"), "--out-alpha",
             path(round, "alpha.csv")},
            {"--seed", "5", "report", "--subjects", S, "--regions", R, "--ipw", "--fit-json", path(round, "fit.json"),
             "--bootstrap", path(round, "boot.csv"), "--out", path(round, "report.csv")},
            {"--seed", "5", "weights", "--subjects", S, "--regions", R, "--targets", T, "--out",
             path(round, "weights.csv")},
            {"--seed", "5", "--lambda1-grid", "0.25,0.0625", "--lambda2-grid", "1,0.25", "simulate", "--scenario",
             "K20n50o10", "--reps", "2", "--out-dir", path(round, "sim")}};
        for (std::size_t c = 0; c < commands.size(); ++c) {
            auto args = commands[c];
            args.insert(args.begin(), "hotspot");
            std::ostringstream out, err;
            if (hotspot::cli::run(args, out, err) != 0) {
                throw std::runtime_error("command " + std::to_string(c + 1) + ": " + err.str());
            }
        }
    };
    Outcome o;
    try {
        run_round("a");
        run_round("b");
        int compared = 0, differing = 0;
        for (const auto& name : {"table.csv", "tune.json", "tune_report.csv", "fit.json", "fit_report.csv", "boot.csv",
                                 "alpha.csv", "report.csv", "weights.csv", "sim/K20n50o10.csv", "sim/long.csv"}) {
            ++compared;
            const std::string a = slurp(path("a", name)), b = slurp(path("b", name));
            if (a.empty() || a != b) {
                ++differing;
                o.detail += std::string(" differs: ") + name;
            }
        }
        o.pass = differing == 0;
        o.detail = std::to_string(compared - differing) + "/" + std::to_string(compared) +
                   " outputs byte-identical across two runs" + o.detail;
    } catch (const std::exception& e) {
        o.detail = std::string("command failed: ") + e.what();
    }
    std::error_code ec;
    fs::remove_all(dir, ec);
    return o;
}

}  // namespace

// With arguments, runs only the listed criteria (for example `acceptance 5 10`).
int main(int argc, char** argv) {
    std::set<int> only;
    for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));
    int failed = 0, ran = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& f) {
        if (!only.empty() && !only.count(id)) return;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail << " ["
                  << fmt(secs) << " s]" << std::endl;
    };
    report(1, "descent", descent);
    report(2, "gamma-step optimality", gamma_optimality);
    report(3, "fused subproblem oracle", fuse_oracle);
    report(4, "gradient", gradient);

    Studies studies;
    bool have_k20 = false;
    auto k20 = [&] {
        if (!have_k20) studies.k20n50 = study("K20n50", {Method::proposed, Method::oracle_alpha});
        have_k20 = true;
    };
    report(5, "K=20, n=50 reproduction", [&] {
        k20();
        return table_one(studies);
    });
    report(6, "rmse_beta trend", [&] {
        k20();
        studies.k40n100 = study("K40n100", {Method::proposed});
        return trend(studies);
    });
    bool soft = false;
    report(7, "outlier detection", [&] {
        studies.k40n100o15 = study("K40n100o15", {Method::proposed, Method::residual_baseline});
        return outliers(studies, soft);
    });
    report(8, "penalty limits", limits);
    report(9, "weighting", weighting_criterion);
    report(10, "determinism", determinism);
    std::cout << failed << " of " << ran << " criteria failed" << std::endl;
    return failed == 0 ? 0 : 1;
}

#include "hotspot_cli/commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include "hotspot/bootstrap.hpp"
#include "hotspot/csv.hpp"
#include "hotspot/error.hpp"
#include "hotspot/format.hpp"
#include "hotspot/ingest.hpp"
#include "hotspot/report.hpp"
#include "hotspot/simbench.hpp"
#include "hotspot/solver.hpp"
#include "hotspot/tuning.hpp"
#include "hotspot/weighting.hpp"
#include "hotspot_cli/fit_json.hpp"
#include "hotspot_cli/outputs.hpp"

namespace hotspot::cli {

namespace {

struct Globals {
    std::uint64_t seed = 1;
    int threads = 1;
    SolverConfig solver;
    TuningGrid grid = TuningGrid::defaults();
    GraphSpec graph;
    std::string distance = "euclidean";
    double cap_quantile = 0.99;
};

struct DataArgs {
    std::string subjects;
    std::string regions;
    std::string targets;
    bool ipw = false;
};

void add_data_options(CLI::App* cmd, DataArgs& d) {
    cmd->add_option("--subjects", d.subjects, "subjects CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--regions", d.regions, "regions CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--targets", d.targets, "post-stratification targets CSV (enables weighting)")
        ->check(CLI::ExistingFile);
    cmd->add_flag("--ipw", d.ipw, "apply inverse-probability weights for missing outcomes");
}

// Loads the dataset, applies weighting when requested, and builds the graph.
Ingested load(const DataArgs& d, const Globals& g) {
    Ingested in = ingest(d.subjects, d.regions, g.graph);
    if (!d.targets.empty() || d.ipw) {
        std::optional<StrataTargets> targets;
        if (!d.targets.empty()) targets = read_targets(d.targets);
        in.data = build_final_weights(in.data, targets, g.cap_quantile).weighted;
    }
    return in;
}

std::vector<std::string> alpha_names(const Dataset& ds) {
    auto names = ds.subject_covariate_names();
    names.insert(names.end(), ds.region_covariate_names().begin(), ds.region_covariate_names().end());
    return names;
}

std::vector<std::string> region_ids(const Dataset& ds) {
    std::vector<std::string> ids;
    for (const auto& r : ds.regions()) ids.push_back(r.region_id);
    return ids;
}

void write_json(OutputSet& outs, const std::string& path, const FitDocument& doc) {
    outs.write(path, [&](std::ostream& o) { o << to_json(doc).dump(2) << '\n'; });
}

void write_report(OutputSet& outs, const std::string& path, const std::vector<ReportRow>& rows) {
    outs.write(path, [&](std::ostream& o) { write_report_csv(o, rows); });
}

// Checks a stored fit against the dataset it is applied to.
void check_fit_matches(const FitDocument& doc, const Dataset& ds) {
    if (doc.region_ids != region_ids(ds)) {
        throw InvalidInput("cli", "fit JSON regions do not match the regions CSV");
    }
    if (doc.alpha_names != alpha_names(ds)) {
        throw InvalidInput("cli", "fit JSON covariates do not match the data files");
    }
}

std::vector<double> read_detection_frequencies(const std::string& path, const Dataset& ds) {
    const CsvTable t = read_csv_file(path);
    const auto id = t.column("region_id");
    const auto freq = t.column("detection_frequency");
    if (!id || !freq) throw InvalidInput("cli", path + ": needs region_id and detection_frequency columns");
    std::map<std::string, double> by_id;
    for (const auto& row : t.rows) by_id[row[*id]] = parse_double(row[*freq], path + " detection_frequency");
    std::vector<double> out;
    for (const auto& r : ds.regions()) {
        auto it = by_id.find(r.region_id);
        if (it == by_id.end()) throw InvalidInput("cli", path + ": no row for region '" + r.region_id + "'");
        out.push_back(it->second);
    }
    return out;
}

Method parse_method(const std::string& s) {
    for (Method m : {Method::proposed, Method::oracle_alpha, Method::oracle_beta, Method::oracle_gamma,
                     Method::residual_baseline}) {
        if (s == method_name(m)) return m;
    }
    throw InvalidInput("cli", "unknown method '" + s + "'");
}

// Sorts user-supplied grids so they can be given in any order.
void normalize_grid(TuningGrid& g) {
    auto desc = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end(), std::greater<>());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    desc(g.lambda1_values);
    desc(g.lambda2_values);
    std::sort(g.neighbor_counts.begin(), g.neighbor_counts.end());
    g.neighbor_counts.erase(std::unique(g.neighbor_counts.begin(), g.neighbor_counts.end()), g.neighbor_counts.end());
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spatial hot-spot detection with a penalized multilevel logistic model", "hotspot"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key = value configuration file");

    Globals g;
    app.add_option("--seed", g.seed, "seed for every random draw")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);

    auto& s = g.solver;
    const char* grp = "Solver";
    app.add_option("--outer-tol,--outer_tol", s.outer_tol)->group(grp)->capture_default_str();
    app.add_option("--max-outer-iter,--max_outer_iter", s.max_outer_iter)->group(grp)->capture_default_str();
    app.add_option("--alpha-newton-tol,--alpha_newton_tol", s.alpha_newton_tol)->group(grp)->capture_default_str();
    app.add_option("--alpha-max-newton-iter,--alpha_max_newton_iter", s.alpha_max_newton_iter)
        ->group(grp)
        ->capture_default_str();
    app.add_option("--gamma-grid-size,--gamma_grid_size", s.gamma_grid_size)->group(grp)->capture_default_str();
    app.add_option("--gamma-root-tol,--gamma_root_tol", s.gamma_root_tol)->group(grp)->capture_default_str();
    app.add_option("--line-search-tol,--line_search_tol", s.line_search_tol)->group(grp)->capture_default_str();
    app.add_option("--merge-tol,--merge_tol", s.merge_tol)->group(grp)->capture_default_str();
    app.add_option("--fuse-tol,--fuse_tol", s.fuse.tol)->group(grp)->capture_default_str();
    app.add_option("--fuse-max-iter,--fuse_max_iter", s.fuse.max_iter)->group(grp)->capture_default_str();
    app.add_option("--admm-rho,--admm_rho", s.fuse.admm_rho)->group(grp)->capture_default_str();
    app.add_option("--over-relaxation,--over_relaxation", s.fuse.over_relaxation)->group(grp)->capture_default_str();
    app.add_option("--polish-every,--polish_every", s.fuse.polish_every)->group(grp)->capture_default_str();

    grp = "Tuning grid";
    app.add_option("--lambda1-grid,--lambda1_values", g.grid.lambda1_values)->group(grp)->delimiter(',');
    app.add_option("--lambda2-grid,--lambda2_values", g.grid.lambda2_values)->group(grp)->delimiter(',');
    app.add_option("--neighbor-counts,--neighbor_counts", g.grid.neighbor_counts)->group(grp)->delimiter(',');

    grp = "Graph";
    app.add_option("--distance", g.distance)
        ->group(grp)
        ->check(CLI::IsMember({"euclidean", "greatcircle"}))
        ->capture_default_str();
    app.add_option("--neighbors,--neighbor_count", g.graph.neighbor_count, "L: neighbors kept per region")
        ->group(grp)
        ->capture_default_str();
    app.add_option("--normalize", g.graph.normalize, "rescale fusion weights to max 1")
        ->group(grp)
        ->capture_default_str();
    app.add_option("--cap-quantile,--cap_quantile", g.cap_quantile, "ipw cap quantile")
        ->group("Weighting")
        ->capture_default_str();

    // fit
    DataArgs fit_data;
    PenaltyConfig fit_pen;
    std::string fit_json, fit_report;
    auto* fit_cmd = app.add_subcommand("fit", "fit at fixed penalties")->fallthrough();
    add_data_options(fit_cmd, fit_data);
    fit_cmd->add_option("--lambda1", fit_pen.lambda1)->required();
    fit_cmd->add_option("--lambda2", fit_pen.lambda2)->required();
    fit_cmd->add_option("--out-json", fit_json, "fit JSON")->required();
    fit_cmd->add_option("--out-report", fit_report, "per-region report CSV");

    // tune
    DataArgs tune_data;
    std::string tune_table, tune_json, tune_report;
    auto* tune_cmd = app.add_subcommand("tune", "select (lambda1, lambda2, L) by BIC*")->fallthrough();
    add_data_options(tune_cmd, tune_data);
    tune_cmd->add_option("--out-table", tune_table, "tuning table CSV")->required();
    tune_cmd->add_option("--out-json", tune_json, "fit JSON of the selected model");
    tune_cmd->add_option("--out-report", tune_report, "report CSV of the selected model");

    // simulate
    std::vector<std::string> sim_scenarios{"K20n50"};
    std::vector<std::string> sim_methods;
    int sim_reps = 100;
    bool sim_no_trend = false;
    std::string sim_dir;
    auto* sim_cmd = app.add_subcommand("simulate", "run the simulation study")->fallthrough();
    sim_cmd->add_option("--scenario", sim_scenarios, "scenario names such as K20n50 or K40n100o15")
        ->delimiter(',')
        ->capture_default_str();
    sim_cmd->add_option("--reps", sim_reps, "replications per scenario")->capture_default_str()->check(CLI::PositiveNumber);
    sim_cmd->add_option("--methods", sim_methods, "subset of methods")->delimiter(',');
    sim_cmd->add_flag("--no-trend", sim_no_trend, "flat beta instead of the three-level spatial trend");
    sim_cmd->add_option("--out-dir", sim_dir, "output directory")->required();

    // bootstrap
    DataArgs boot_data;
    std::string boot_fit, boot_regions, boot_alpha;
    int boot_B = 1000;
    auto* boot_cmd = app.add_subcommand("bootstrap", "stratified bootstrap at fixed penalties")->fallthrough();
    add_data_options(boot_cmd, boot_data);
    boot_cmd->add_option("--fit-json", boot_fit, "fit JSON providing penalties, graph and reference fit")
        ->required()
        ->check(CLI::ExistingFile);
    boot_cmd->add_option("-B,--replicates", boot_B)->capture_default_str()->check(CLI::PositiveNumber);
    boot_cmd->add_option("--out-regions", boot_regions, "per-region CSV")->required();
    boot_cmd->add_option("--out-alpha", boot_alpha, "coefficient interval CSV");

    // weights
    DataArgs w_data;
    std::string w_out, w_subjects;
    auto* w_cmd = app.add_subcommand("weights", "build ipw and post-stratification weights")->fallthrough();
    w_cmd->add_option("--subjects", w_data.subjects)->required()->check(CLI::ExistingFile);
    w_cmd->add_option("--regions", w_data.regions)->required()->check(CLI::ExistingFile);
    w_cmd->add_option("--targets", w_data.targets)->check(CLI::ExistingFile);
    w_cmd->add_option("--out", w_out, "per-subject weight CSV")->required();
    w_cmd->add_option("--out-subjects", w_subjects, "subjects CSV with the final weights in the weight column");

    // report
    DataArgs r_data;
    std::string r_fit, r_boot, r_out;
    auto* r_cmd = app.add_subcommand("report", "per-region rate report from a stored fit")->fallthrough();
    add_data_options(r_cmd, r_data);
    r_cmd->add_option("--fit-json", r_fit)->required()->check(CLI::ExistingFile);
    r_cmd->add_option("--bootstrap", r_boot, "bootstrap per-region CSV (adds detection frequencies)")
        ->check(CLI::ExistingFile);
    r_cmd->add_option("--out", r_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    OutputSet outs;
    try {
        g.graph.distance = g.distance == "greatcircle" ? Distance::greatcircle : Distance::euclidean;
        normalize_grid(g.grid);
        g.solver.validate();
        g.graph.validate();

        if (*fit_cmd) {
            const Ingested in = load(fit_data, g);
            FitResult f = fit(in.data, in.graph, fit_pen, g.solver);
            if (!f.converged) {
                err << "warning: solver: outer loop reached max_outer_iter without meeting outer_tol\n";
            }
            write_json(outs, fit_json, {fit_pen, g.graph, f, region_ids(in.data), alpha_names(in.data)});
            if (!fit_report.empty()) write_report(outs, fit_report, build_report(in.data, f.params));
        } else if (*tune_cmd) {
            const Dataset ds = load(tune_data, g).data;
            const TuningResult t = tune(ds, g.graph, g.grid, g.solver, g.threads);
            outs.write(tune_table, [&](std::ostream& o) { write_tuning_csv(o, t.table); });
            GraphSpec chosen = g.graph;
            if (t.best_row.neighbor_count > 0) chosen.neighbor_count = t.best_row.neighbor_count;
            const PenaltyConfig pen{t.best_row.lambda1, t.best_row.lambda2};
            if (!tune_json.empty()) {
                write_json(outs, tune_json, {pen, chosen, t.best, region_ids(ds), alpha_names(ds)});
            }
            if (!tune_report.empty()) write_report(outs, tune_report, build_report(ds, t.best.params));
            out << "selected L=" << chosen.neighbor_count << " lambda1=" << format_double(pen.lambda1)
                << " lambda2=" << format_double(pen.lambda2) << " bic=" << format_double(t.best_row.bic)
                << " df=" << t.best_row.df << '\n';
        } else if (*sim_cmd) {
            std::vector<Scenario> scenarios;
            for (const auto& name : sim_scenarios) {
                Scenario sc = Scenario::parse(name);
                sc.replications = sim_reps;
                sc.seed = g.seed;
                sc.spatial_trend = !sim_no_trend;
                scenarios.push_back(sc);
            }
            StudyOptions opt;
            opt.threads = g.threads;
            if (!sim_methods.empty()) {
                opt.methods.clear();
                for (const auto& m : sim_methods) opt.methods.push_back(parse_method(m));
            }
            std::filesystem::create_directories(sim_dir);
            const auto reports = run_study(scenarios, g.grid, g.solver, opt);
            for (const auto& rep : reports) {
                outs.write((std::filesystem::path(sim_dir) / (rep.scenario.name() + ".csv")).string(),
                           [&](std::ostream& o) { write_summary_csv(o, rep); });
                for (const auto& [method, failed] : rep.failures) {
                    if (failed) err << rep.scenario.name() << ": " << method << " failed in " << failed
                                    << " replications\n";
                }
            }
            outs.write((std::filesystem::path(sim_dir) / "long.csv").string(),
                       [&](std::ostream& o) { write_long_csv(o, reports); });
        } else if (*boot_cmd) {
            const FitDocument doc = read_fit_json(boot_fit);
            Globals local = g;
            local.graph = doc.graph;
            const Ingested in = load(boot_data, local);
            check_fit_matches(doc, in.data);
            FitResult reference = fit(in.data, in.graph, doc.penalty, g.solver, doc.fit.params);
            BootstrapOptions bo;
            bo.replicates = boot_B;
            bo.seed = g.seed;
            bo.threads = g.threads;
            const auto res = bootstrap(in.data, in.graph, doc.penalty, g.solver, reference, bo);
            outs.write(boot_regions, [&](std::ostream& o) {
                o << "region_id,detection_frequency,baseline_rate,baseline_low,baseline_high,adjusted_rate,"
                     "adjusted_low,adjusted_high\n";
                for (std::size_t i = 0; i < in.data.num_regions(); ++i) {
                    const auto& b = res.baseline_rate[i];
                    const auto& a = res.adjusted_rate[i];
                    o << csv_field(in.data.regions()[i].region_id) << ',' << format_double(res.detection_frequency[i])
                      << ',' << format_double(b.estimate) << ',' << format_double(b.low) << ','
                      << format_double(b.high) << ',' << format_double(a.estimate) << ',' << format_double(a.low)
                      << ',' << format_double(a.high) << '\n';
                }
            });
            if (!boot_alpha.empty()) {
                const auto names = alpha_names(in.data);
                outs.write(boot_alpha, [&](std::ostream& o) {
                    o << "coefficient,estimate,ci_low,ci_high\n";
                    for (std::size_t k = 0; k < names.size(); ++k) {
                        o << csv_field(names[k]) << ',' << format_double(res.alpha[k].estimate) << ','
                          << format_double(res.alpha[k].low) << ',' << format_double(res.alpha[k].high) << '\n';
                    }
                });
            }
        } else if (*w_cmd) {
            const Dataset ds = read_dataset(w_data.subjects, w_data.regions);
            std::optional<StrataTargets> targets;
            if (!w_data.targets.empty()) targets = read_targets(w_data.targets);
            const WeightReport rep = build_final_weights(ds, targets, g.cap_quantile);
            outs.write(w_out, [&](std::ostream& o) {
                o << "row,region_id,observed,ipw,post_strat_factor,final_weight\n";
                for (std::size_t j = 0; j < ds.num_subjects(); ++j) {
                    const auto& sj = ds.subjects()[j];
                    o << j + 1 << ',' << csv_field(ds.regions()[sj.region_index].region_id) << ',' << sj.observed
                      << ',' << format_double(rep.ipw[j]) << ',' << format_double(rep.post_strat_factor[j]) << ','
                      << format_double(rep.final_weight[j]) << '\n';
                }
            });
            if (!w_subjects.empty()) {
                outs.write(w_subjects, [&](std::ostream& o) {
                    o << "region_id,outcome,observed,weight";
                    for (const auto& n : ds.subject_covariate_names()) o << ',' << csv_field(n);
                    o << '\n';
                    for (std::size_t j = 0; j < ds.num_subjects(); ++j) {
                        const auto& sj = ds.subjects()[j];
                        o << csv_field(ds.regions()[sj.region_index].region_id) << ','
                          << (sj.observed ? std::to_string(sj.outcome) : std::string("NA")) << ',' << sj.observed
                          << ',' << format_double(rep.final_weight[j]);
                        for (double z : sj.covariates) o << ',' << format_double(z);
                        o << '\n';
                    }
                });
            }
            out << "weights: " << rep.num_capped << " capped at " << format_double(rep.cap)
                << "; final weight min " << format_double(rep.summary.min) << ", median "
                << format_double(rep.summary.median) << ", max " << format_double(rep.summary.max) << '\n';
        } else if (*r_cmd) {
            const FitDocument doc = read_fit_json(r_fit);
            Globals local = g;
            local.graph = doc.graph;
            const Ingested in = load(r_data, local);
            check_fit_matches(doc, in.data);
            std::vector<double> freq;
            if (!r_boot.empty()) freq = read_detection_frequencies(r_boot, in.data);
            write_report(outs, r_out, build_report(in.data, doc.fit.params, freq));
        }
        outs.commit();
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace hotspot::cli

#include "hotspot_cli/fit_json.hpp"

#include <fstream>

#include "hotspot/error.hpp"

namespace hotspot::cli {

using nlohmann::ordered_json;

namespace {

ordered_json vec(const Eigen::VectorXd& v) {
    ordered_json a = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Eigen::VectorXd unvec(const ordered_json& a, const char* name) {
    if (!a.is_array()) throw InvalidInput("cli", std::string("fit JSON: '") + name + "' must be an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
}

}  // namespace

ordered_json to_json(const FitDocument& d) {
    ordered_json j;
    j["format_version"] = kFitFormat;
    j["penalty"] = {{"lambda1", d.penalty.lambda1}, {"lambda2", d.penalty.lambda2}};
    j["graph"] = {{"distance", d.graph.distance == Distance::greatcircle ? "greatcircle" : "euclidean"},
                  {"neighbors", d.graph.neighbor_count},
                  {"normalize", d.graph.normalize}};
    j["alpha_names"] = d.alpha_names;
    j["region_ids"] = d.region_ids;
    j["params"] = {{"alpha", vec(d.fit.params.alpha)},
                   {"beta", vec(d.fit.params.beta)},
                   {"gamma", vec(d.fit.params.gamma)}};
    j["objective_trace"] = d.fit.objective_trace;
    j["converged"] = d.fit.converged;
    j["outer_iterations"] = d.fit.outer_iterations;
    j["df"] = d.fit.df;
    j["bic"] = d.fit.bic;
    return j;
}

FitDocument fit_from_json(const ordered_json& j) {
    try {
        if (j.at("format_version").get<std::string>() != kFitFormat) {
            throw InvalidInput("cli", "fit JSON has unsupported format_version '" +
                                          j.at("format_version").get<std::string>() + "'");
        }
        FitDocument d;
        d.penalty.lambda1 = j.at("penalty").at("lambda1").get<double>();
        d.penalty.lambda2 = j.at("penalty").at("lambda2").get<double>();
        const auto& g = j.at("graph");
        d.graph.distance = g.at("distance").get<std::string>() == "greatcircle" ? Distance::greatcircle
                                                                               : Distance::euclidean;
        d.graph.neighbor_count = g.at("neighbors").get<int>();
        d.graph.normalize = g.at("normalize").get<bool>();
        d.alpha_names = j.at("alpha_names").get<std::vector<std::string>>();
        d.region_ids = j.at("region_ids").get<std::vector<std::string>>();
        const auto& p = j.at("params");
        d.fit.params.alpha = unvec(p.at("alpha"), "alpha");
        d.fit.params.beta = unvec(p.at("beta"), "beta");
        d.fit.params.gamma = unvec(p.at("gamma"), "gamma");
        d.fit.objective_trace = j.at("objective_trace").get<std::vector<double>>();
        d.fit.converged = j.at("converged").get<bool>();
        d.fit.outer_iterations = j.at("outer_iterations").get<int>();
        d.fit.df = j.at("df").get<int>();
        d.fit.bic = j.at("bic").get<double>();
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("cli", std::string("malformed fit JSON: ") + e.what());
    }
}

FitDocument read_fit_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cli", "cannot open '" + path + "'");
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("cli", path + ": " + e.what());
    }
    return fit_from_json(j);
}

}  // namespace hotspot::cli

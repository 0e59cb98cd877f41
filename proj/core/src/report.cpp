#include "hotspot/report.hpp"

#include <cassert>
#include <istream>
#include <ostream>

#include "hotspot/csv.hpp"
#include "hotspot/error.hpp"
#include "hotspot/format.hpp"
#include "hotspot/objective.hpp"
#include "hotspot/stats.hpp"

namespace hotspot {

const char* flag_name(OutlierFlag f) {
    switch (f) {
        case OutlierFlag::above: return "above";
        case OutlierFlag::below: return "below";
        case OutlierFlag::none: return "none";
    }
    return "none";
}

OutlierFlag parse_flag(const std::string& s) {
    if (s == "above") return OutlierFlag::above;
    if (s == "below") return OutlierFlag::below;
    if (s == "none") return OutlierFlag::none;
    throw InvalidInput("cli", "unknown outlier flag '" + s + "'");
}

std::vector<double> adjusted_rates(const Dataset& ds, const ModelParams& params) {
    check_dimensions(ds, params);
    std::vector<double> out(ds.num_regions());
    const auto& subjects = ds.subjects();
    for (std::size_t i = 0; i < ds.num_regions(); ++i) {
        KahanSum num, den;
        const double b = params.beta[static_cast<Eigen::Index>(i)];
        for (auto j : ds.members(i)) {
            if (!subjects[j].observed) continue;
            const double eta = (params.alpha.size() ? ds.design_row(j).dot(params.alpha) : 0.0) + b;
            num.add(subjects[j].weight * expit(eta));
            den.add(subjects[j].weight);
        }
        out[i] = num.value() / den.value();
    }
    return out;
}

std::vector<ReportRow> build_report(const Dataset& ds, const ModelParams& params,
                                    std::span<const double> detection_frequency) {
    if (!detection_frequency.empty() && detection_frequency.size() != ds.num_regions()) {
        throw InvalidInput("cli", "detection frequencies do not match the number of regions");
    }
    const auto adjusted = adjusted_rates(ds, params);
    std::vector<ReportRow> rows;
    rows.reserve(ds.num_regions());
    for (std::size_t i = 0; i < ds.num_regions(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        ReportRow r;
        r.region_id = ds.regions()[i].region_id;
        r.n = ds.region_size(i);
        r.crude_rate = ds.crude_rate(i);
        r.baseline_rate = expit(params.beta[ii]);
        r.adjusted_rate = adjusted[i];
        r.gamma_hat = params.gamma[ii];
        r.flag = r.gamma_hat > 0 ? OutlierFlag::above : r.gamma_hat < 0 ? OutlierFlag::below : OutlierFlag::none;
        if (!detection_frequency.empty()) r.detection_frequency = detection_frequency[i];
        assert(r.baseline_rate >= 0.0 && r.baseline_rate <= 1.0);
        assert(r.adjusted_rate >= 0.0 && r.adjusted_rate <= 1.0);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
    out << "region_id,n,crude_rate,baseline_rate,adjusted_rate,gamma_hat,outlier_flag,detection_frequency\n";
    for (const auto& r : rows) {
        out << csv_field(r.region_id) << ',' << r.n << ',' << format_double(r.crude_rate) << ','
            << format_double(r.baseline_rate) << ',' << format_double(r.adjusted_rate) << ','
            << format_double(r.gamma_hat) << ',' << flag_name(r.flag) << ','
            << (r.detection_frequency ? format_double(*r.detection_frequency) : std::string()) << '\n';
    }
}

std::vector<ReportRow> read_report_csv(std::istream& in) {
    const CsvTable t = read_csv(in, "report");
    const std::vector<std::string> expected{"region_id",     "n",         "crude_rate",   "baseline_rate",
                                            "adjusted_rate", "gamma_hat", "outlier_flag", "detection_frequency"};
    if (t.header != expected) throw InvalidInput("cli", "report: unexpected header");
    std::vector<ReportRow> rows;
    for (const auto& f : t.rows) {
        ReportRow r;
        r.region_id = f[0];
        r.n = static_cast<std::size_t>(parse_double(f[1], "n"));
        r.crude_rate = parse_double(f[2], "crude_rate");
        r.baseline_rate = parse_double(f[3], "baseline_rate");
        r.adjusted_rate = parse_double(f[4], "adjusted_rate");
        r.gamma_hat = parse_double(f[5], "gamma_hat");
        r.flag = parse_flag(f[6]);
        if (!f[7].empty()) r.detection_frequency = parse_double(f[7], "detection_frequency");
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace hotspot

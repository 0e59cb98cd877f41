#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hotspot/dataset.hpp"
#include "hotspot/params.hpp"

namespace hotspot {

enum class OutlierFlag { none, above, below };
const char* flag_name(OutlierFlag f);
OutlierFlag parse_flag(const std::string& s);

struct ReportRow {
    std::string region_id;
    std::size_t n = 0;
    double crude_rate = 0.0;     // weighted observed outcome rate
    double baseline_rate = 0.0;  // expit(beta_i)
    double adjusted_rate = 0.0;  // weighted mean over observed subjects of expit(Q alpha + beta_i)
    double gamma_hat = 0.0;
    OutlierFlag flag = OutlierFlag::none;
    std::optional<double> detection_frequency;

    bool operator==(const ReportRow&) const = default;
};

std::vector<ReportRow> build_report(const Dataset& ds, const ModelParams& params,
                                    std::span<const double> detection_frequency = {});

// Adjusted rate of every region (the same quantity as ReportRow::adjusted_rate).
std::vector<double> adjusted_rates(const Dataset& ds, const ModelParams& params);

// region_id,n,crude_rate,baseline_rate,adjusted_rate,gamma_hat,outlier_flag,detection_frequency
// Numbers are written in shortest round-trip form, so reading reproduces rows exactly.
void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_report_csv(std::istream& in);

}  // namespace hotspot

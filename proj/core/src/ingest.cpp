#include "hotspot/ingest.hpp"

#include <map>

#include "hotspot/csv.hpp"
#include "hotspot/error.hpp"
#include "hotspot/format.hpp"

namespace hotspot {

namespace {

std::string where(const std::string& file, std::size_t row) {
    // +2: header is line 1 and rows are 0-based
    return file + " row " + std::to_string(row + 2);
}

int parse_binary(const std::string& s, const std::string& what) {
    if (s == "0") return 0;
    if (s == "1") return 1;
    throw InvalidInput("cli", what + " must be 0 or 1, got '" + s + "'");
}

}  // namespace

Dataset read_dataset(const std::string& subjects_csv, const std::string& regions_csv) {
    const CsvTable rt = read_csv_file(regions_csv);
    if (rt.header.size() < 3 || rt.header[0] != "region_id" || rt.header[1] != "coord1" || rt.header[2] != "coord2") {
        throw InvalidInput("cli", regions_csv + ": header must start with region_id,coord1,coord2");
    }
    std::vector<std::string> xnames;
    for (std::size_t c = 3; c < rt.header.size(); ++c) {
        if (rt.header[c].rfind("x_", 0) != 0) {
            throw InvalidInput("cli", regions_csv + ": unexpected column '" + rt.header[c] +
                                          "' (region covariates must be named x_*)");
        }
        xnames.push_back(rt.header[c]);
    }
    std::vector<RegionRecord> regions;
    std::map<std::string, std::size_t> index;
    for (std::size_t r = 0; r < rt.rows.size(); ++r) {
        const auto& f = rt.rows[r];
        const std::string at = where(regions_csv, r);
        if (f[0].empty()) throw InvalidInput("cli", at + ": empty region_id");
        if (!index.emplace(f[0], r).second) {
            throw InvalidInput("cli", at + ": duplicate region_id '" + f[0] + "'");
        }
        RegionRecord rec;
        rec.region_id = f[0];
        rec.location = {parse_double(f[1], at + " coord1"), parse_double(f[2], at + " coord2")};
        for (std::size_t c = 3; c < f.size(); ++c) rec.covariates.push_back(parse_double(f[c], at + " " + rt.header[c]));
        regions.push_back(std::move(rec));
    }

    const CsvTable st = read_csv_file(subjects_csv);
    if (st.header.size() < 3 || st.header[0] != "region_id" || st.header[1] != "outcome" ||
        st.header[2] != "observed") {
        throw InvalidInput("cli", subjects_csv + ": header must start with region_id,outcome,observed");
    }
    std::size_t first_cov = 3;
    const bool has_weight = st.header.size() > 3 && st.header[3] == "weight";
    if (has_weight) first_cov = 4;
    std::vector<std::string> znames;
    for (std::size_t c = first_cov; c < st.header.size(); ++c) {
        if (st.header[c].rfind("z_", 0) != 0) {
            throw InvalidInput("cli", subjects_csv + ": unexpected column '" + st.header[c] +
                                          "' (subject covariates must be named z_*)");
        }
        znames.push_back(st.header[c]);
    }
    std::vector<SubjectRecord> subjects;
    subjects.reserve(st.rows.size());
    for (std::size_t r = 0; r < st.rows.size(); ++r) {
        const auto& f = st.rows[r];
        const std::string at = where(subjects_csv, r);
        auto it = index.find(f[0]);
        if (it == index.end()) throw InvalidInput("cli", at + ": unknown region_id '" + f[0] + "'");
        SubjectRecord s;
        s.region_index = it->second;
        s.observed = parse_binary(f[2], at + " observed");
        if (s.observed || !(f[1].empty() || f[1] == "NA")) s.outcome = parse_binary(f[1], at + " outcome");
        if (has_weight) s.weight = parse_double(f[3], at + " weight");
        for (std::size_t c = first_cov; c < f.size(); ++c) {
            s.covariates.push_back(parse_double(f[c], at + " " + st.header[c]));
        }
        subjects.push_back(std::move(s));
    }
    return Dataset(std::move(regions), std::move(subjects), std::move(znames), std::move(xnames));
}

std::vector<std::vector<double>> region_locations(const Dataset& ds) {
    std::vector<std::vector<double>> loc;
    loc.reserve(ds.num_regions());
    for (const auto& r : ds.regions()) loc.push_back(r.location);
    return loc;
}

Ingested ingest(const std::string& subjects_csv, const std::string& regions_csv, const GraphSpec& spec) {
    Dataset ds = read_dataset(subjects_csv, regions_csv);
    FusionGraph g;
    try {
        g = build_graph(region_locations(ds), spec);
    } catch (const InvalidInput& e) {
        throw InvalidInput("cli", regions_csv + ": " + e.what());
    }
    return {std::move(ds), std::move(g)};
}

StrataTargets read_targets(const std::string& targets_csv) {
    const CsvTable t = read_csv_file(targets_csv);
    if (t.header.size() < 2 || t.header.back() != "proportion") {
        throw InvalidInput("cli", targets_csv + ": header must be <covariate columns...>,proportion");
    }
    StrataTargets out;
    out.covariates.assign(t.header.begin(), t.header.end() - 1);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& f = t.rows[r];
        const std::string at = where(targets_csv, r);
        std::vector<double> cell;
        for (std::size_t c = 0; c + 1 < f.size(); ++c) cell.push_back(parse_double(f[c], at + " " + t.header[c]));
        if (!out.proportions.emplace(cell, parse_double(f.back(), at + " proportion")).second) {
            throw InvalidInput("cli", at + ": duplicate target cell");
        }
    }
    out.validate();
    return out;
}

}  // namespace hotspot

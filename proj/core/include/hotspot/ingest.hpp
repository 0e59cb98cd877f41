#pragma once

#include <string>

#include "hotspot/dataset.hpp"
#include "hotspot/graph.hpp"
#include "hotspot/spatial.hpp"
#include "hotspot/weighting.hpp"

namespace hotspot {

// Regions: region_id,coord1,coord2,x_*...  Subjects: region_id,outcome,observed[,weight],z_*...
// Covariate names are the column names. Outcome may be empty or NA when observed = 0.
Dataset read_dataset(const std::string& subjects_csv, const std::string& regions_csv);

struct Ingested {
    Dataset data;
    FusionGraph graph;
};

Ingested ingest(const std::string& subjects_csv, const std::string& regions_csv, const GraphSpec& spec);

// <covariate columns...>,proportion
StrataTargets read_targets(const std::string& targets_csv);

std::vector<std::vector<double>> region_locations(const Dataset& ds);

}  // namespace hotspot

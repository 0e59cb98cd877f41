#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hotspot/dataset.hpp"
#include "hotspot/params.hpp"
#include "hotspot/solver.hpp"
#include "hotspot/spatial.hpp"

namespace hotspot::cli {

inline constexpr const char* kFitFormat = "hotspot-fit/1";

struct FitDocument {
    PenaltyConfig penalty;
    GraphSpec graph;
    FitResult fit;
    std::vector<std::string> region_ids;
    std::vector<std::string> alpha_names;
};

nlohmann::ordered_json to_json(const FitDocument& doc);
FitDocument fit_from_json(const nlohmann::ordered_json& j);

FitDocument read_fit_json(const std::string& path);

}  // namespace hotspot::cli

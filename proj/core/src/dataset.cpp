#include "hotspot/dataset.hpp"

#include <cmath>
#include <map>
#include <set>
#include <string>

#include "hotspot/error.hpp"

namespace hotspot {

namespace {

std::string join_ids(const std::vector<std::string>& ids) {
    std::string out;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        if (k) out += ", ";
        out += ids[k];
    }
    return out;
}

}  // namespace

Dataset::Dataset(std::vector<RegionRecord> regions, std::vector<SubjectRecord> subjects,
                 std::vector<std::string> subject_covariate_names,
                 std::vector<std::string> region_covariate_names)
    : regions_(std::move(regions)),
      subjects_(std::move(subjects)),
      subject_names_(std::move(subject_covariate_names)),
      region_names_(std::move(region_covariate_names)) {
    validate();
    build_patterns();
}

void Dataset::validate() {
    if (regions_.empty()) {
        throw InvalidInput("core", "dataset has no regions");
    }
    subject_dim_ = !subject_names_.empty() ? subject_names_.size()
                   : subjects_.empty()     ? 0
                                           : subjects_.front().covariates.size();
    region_dim_ = !region_names_.empty() ? region_names_.size() : regions_.front().covariates.size();

    std::set<std::string> seen;
    for (const auto& r : regions_) {
        if (!seen.insert(r.region_id).second) {
            throw InvalidInput("core", "duplicate region_id '" + r.region_id + "'");
        }
        if (r.covariates.size() != region_dim_) {
            throw InvalidInput("core", "region '" + r.region_id + "' has " +
                                           std::to_string(r.covariates.size()) +
                                           " covariates, expected " + std::to_string(region_dim_));
        }
        for (double x : r.covariates) {
            if (!std::isfinite(x)) {
                throw InvalidInput("core", "region '" + r.region_id + "' has a non-finite covariate");
            }
        }
    }

    const std::size_t K = regions_.size();
    members_.assign(K, {});
    region_weight_.assign(K, 0.0);
    crude_rate_.assign(K, 0.0);
    std::vector<double> weighted_successes(K, 0.0);
    num_observed_ = 0;

    for (std::size_t j = 0; j < subjects_.size(); ++j) {
        const auto& s = subjects_[j];
        const std::string where = "subject " + std::to_string(j);
        if (s.region_index >= K) {
            throw InvalidInput("core", where + " references region index " +
                                           std::to_string(s.region_index) + " >= K = " +
                                           std::to_string(K));
        }
        if (s.observed != 0 && s.observed != 1) {
            throw InvalidInput("core", where + ": observed must be 0 or 1");
        }
        if (s.observed == 1 && s.outcome != 0 && s.outcome != 1) {
            throw InvalidInput("core", where + ": outcome must be 0 or 1");
        }
        if (!(s.weight > 0.0) || !std::isfinite(s.weight)) {
            throw InvalidInput("core", where + ": weight must be positive and finite");
        }
        if (s.covariates.size() != subject_dim_) {
            throw InvalidInput("core", where + " has " + std::to_string(s.covariates.size()) +
                                           " covariates, expected " + std::to_string(subject_dim_));
        }
        for (double z : s.covariates) {
            if (!std::isfinite(z)) {
                throw InvalidInput("core", where + " has a non-finite covariate");
            }
        }
        members_[s.region_index].push_back(j);
        if (s.observed == 1) {
            ++num_observed_;
            region_weight_[s.region_index] += s.weight;
            weighted_successes[s.region_index] += s.weight * s.outcome;
        }
    }

    std::vector<std::string> degenerate;
    total_weight_ = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
        total_weight_ += region_weight_[i];
        const double w = region_weight_[i];
        const double ws = weighted_successes[i];
        // With positive weights the rate is inside (0, 1) iff both outcomes occur.
        if (!(w > 0.0) || !(ws > 0.0) || !(ws < w)) {
            degenerate.push_back(regions_[i].region_id);
        } else {
            crude_rate_[i] = ws / w;
        }
    }
    if (!degenerate.empty()) {
        throw InvalidInput("core",
                           "observed outcome rate must lie strictly inside (0, 1) in every region; "
                           "offending regions: " +
                               join_ids(degenerate));
    }
}

void Dataset::build_patterns() {
    const std::size_t K = regions_.size();
    const std::size_t p = alpha_dim();

    std::vector<std::vector<double>> rows;
    std::vector<double> weight, successes;
    std::vector<std::size_t> region;
    patterns_.region_begin.assign(K + 1, 0);

    for (std::size_t i = 0; i < K; ++i) {
        patterns_.region_begin[i] = rows.size();
        std::map<std::vector<double>, std::size_t> index;
        for (std::size_t j : members_[i]) {
            const auto& s = subjects_[j];
            if (s.observed != 1) continue;
            std::vector<double> q = s.covariates;
            q.insert(q.end(), regions_[i].covariates.begin(), regions_[i].covariates.end());
            auto [it, inserted] = index.try_emplace(std::move(q), rows.size());
            if (inserted) {
                rows.push_back(it->first);
                weight.push_back(0.0);
                successes.push_back(0.0);
                region.push_back(i);
            }
            weight[it->second] += s.weight;
            successes[it->second] += s.weight * s.outcome;
        }
    }
    patterns_.region_begin[K] = rows.size();

    const auto P = static_cast<Eigen::Index>(rows.size());
    patterns_.design.resize(P, static_cast<Eigen::Index>(p));
    patterns_.weight.resize(P);
    patterns_.successes.resize(P);
    for (Eigen::Index r = 0; r < P; ++r) {
        for (std::size_t c = 0; c < p; ++c) {
            patterns_.design(r, static_cast<Eigen::Index>(c)) = rows[static_cast<std::size_t>(r)][c];
        }
        patterns_.weight[r] = weight[static_cast<std::size_t>(r)];
        patterns_.successes[r] = successes[static_cast<std::size_t>(r)];
    }
    patterns_.region = std::move(region);
}

Eigen::VectorXd Dataset::design_row(std::size_t subject) const {
    const auto& s = subjects_.at(subject);
    const auto& x = regions_[s.region_index].covariates;
    Eigen::VectorXd q(static_cast<Eigen::Index>(alpha_dim()));
    Eigen::Index k = 0;
    for (double z : s.covariates) q[k++] = z;
    for (double v : x) q[k++] = v;
    return q;
}

Dataset Dataset::with_weights(std::span<const double> weights) const {
    if (weights.size() != subjects_.size()) {
        throw InvalidInput("core", "weight vector length " + std::to_string(weights.size()) +
                                       " does not match " + std::to_string(subjects_.size()) +
                                       " subjects");
    }
    auto subjects = subjects_;
    for (std::size_t j = 0; j < subjects.size(); ++j) {
        subjects[j].weight = weights[j];
    }
    return Dataset(regions_, std::move(subjects), subject_names_, region_names_);
}

}  // namespace hotspot

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hotspot {

struct SubjectRecord {
    std::size_t region_index = 0;
    int outcome = 0;   // Y_ij; ignored when observed == 0
    int observed = 1;  // R_ij
    double weight = 1.0;
    std::vector<double> covariates;  // Z_ij
};

struct RegionRecord {
    std::string region_id;
    std::vector<double> location;    // S_i
    std::vector<double> covariates;  // X_i
};

// Observed subjects of one region that share the same design row Q_ij =
// (Z_ij, X_i) always share the same linear predictor, so every likelihood
// computation runs over these aggregated patterns instead of subjects.
struct PatternTable {
    Eigen::MatrixXd design;                 // one row Q per pattern
    Eigen::VectorXd weight;                 // sum of w_ij over the pattern
    Eigen::VectorXd successes;              // sum of w_ij * Y_ij
    std::vector<std::size_t> region;        // owning region of each pattern
    std::vector<std::size_t> region_begin;  // size K + 1, patterns sorted by region

    std::size_t size() const { return region.size(); }
};

// Subjects grouped by region, validated on construction. Every region must
// have observed subjects with both outcomes (weighted crude rate strictly
// inside (0, 1)); otherwise construction throws InvalidInput listing the
// offending regions.
class Dataset {
public:
    Dataset(std::vector<RegionRecord> regions, std::vector<SubjectRecord> subjects,
            std::vector<std::string> subject_covariate_names = {},
            std::vector<std::string> region_covariate_names = {});

    std::size_t num_regions() const { return regions_.size(); }
    std::size_t num_subjects() const { return subjects_.size(); }
    std::size_t subject_dim() const { return subject_dim_; }
    std::size_t region_dim() const { return region_dim_; }
    std::size_t alpha_dim() const { return subject_dim_ + region_dim_; }

    const std::vector<RegionRecord>& regions() const { return regions_; }
    const std::vector<SubjectRecord>& subjects() const { return subjects_; }
    const std::vector<std::string>& subject_covariate_names() const { return subject_names_; }
    const std::vector<std::string>& region_covariate_names() const { return region_names_; }

    // Indices into subjects() of the members of region i, in input order.
    const std::vector<std::size_t>& members(std::size_t region) const { return members_[region]; }
    std::size_t region_size(std::size_t region) const { return members_[region].size(); }
    double region_weight(std::size_t region) const { return region_weight_[region]; }  // w_i.
    double total_weight() const { return total_weight_; }                             // w..
    std::size_t num_observed() const { return num_observed_; }

    // Weighted crude rate of region i over its observed subjects.
    double crude_rate(std::size_t region) const { return crude_rate_[region]; }

    const PatternTable& patterns() const { return patterns_; }

    // Design row Q_ij of subject j (observed or not).
    Eigen::VectorXd design_row(std::size_t subject) const;

    // Same subjects with replaced weights (one per subject).
    Dataset with_weights(std::span<const double> weights) const;

private:
    void validate();
    void build_patterns();

    std::vector<RegionRecord> regions_;
    std::vector<SubjectRecord> subjects_;
    std::vector<std::string> subject_names_;
    std::vector<std::string> region_names_;
    std::size_t subject_dim_ = 0;
    std::size_t region_dim_ = 0;
    std::vector<std::vector<std::size_t>> members_;
    std::vector<double> region_weight_;
    std::vector<double> crude_rate_;
    double total_weight_ = 0.0;
    std::size_t num_observed_ = 0;
    PatternTable patterns_;
};

}  // namespace hotspot

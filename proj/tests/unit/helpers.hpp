#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "hotspot/dataset.hpp"
#include "hotspot/graph.hpp"
#include "hotspot/params.hpp"

namespace testing {

// Random dataset with K regions of n subjects, p subject and q region
// covariates; every region gets both outcomes.
inline hotspot::Dataset random_dataset(std::mt19937_64& rng, std::size_t K, std::size_t n, std::size_t p = 1,
                                       std::size_t q = 1, bool weighted = false, bool missing = false) {
    std::normal_distribution<double> N01;
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<hotspot::RegionRecord> regions;
    std::vector<hotspot::SubjectRecord> subjects;
    for (std::size_t i = 0; i < K; ++i) {
        hotspot::RegionRecord r;
        r.region_id = "g" + std::to_string(i);
        r.location = {100.0 * U(rng), 100.0 * U(rng)};
        for (std::size_t k = 0; k < q; ++k) r.covariates.push_back(U(rng) < 0.5 ? 0.0 : 1.0);
        regions.push_back(r);
        const double base = N01(rng) * 0.7;
        for (std::size_t j = 0; j < n; ++j) {
            hotspot::SubjectRecord s;
            s.region_index = i;
            for (std::size_t k = 0; k < p; ++k) s.covariates.push_back(k == 0 ? (U(rng) < 0.5 ? 0.0 : 1.0) : N01(rng));
            const double lin = base + (p > 0 ? 0.3 * s.covariates[0] : 0.0);
            const double pr = 1.0 / (1.0 + std::exp(-lin));
            s.outcome = U(rng) < pr;
            if (j == 0) s.outcome = 1;
            if (j == 1) s.outcome = 0;
            s.observed = (missing && j > 1 && U(rng) < 0.2) ? 0 : 1;
            s.weight = weighted ? 0.5 + U(rng) : 1.0;
            subjects.push_back(s);
        }
    }
    std::vector<std::string> zn, xn;
    for (std::size_t k = 0; k < p; ++k) zn.push_back("z_" + std::to_string(k));
    for (std::size_t k = 0; k < q; ++k) xn.push_back("x_" + std::to_string(k));
    return hotspot::Dataset(regions, subjects, zn, xn);
}

inline hotspot::FusionGraph random_graph(std::mt19937_64& rng, std::size_t K, double density = 0.5) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<hotspot::FusionEdge> edges;
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = i + 1; j < K; ++j) {
            if (j == i + 1 || U(rng) < density) edges.push_back({i, j, 0.05 + U(rng)});
        }
    }
    return hotspot::FusionGraph(K, edges);
}

inline hotspot::ModelParams random_params(std::mt19937_64& rng, const hotspot::Dataset& ds, double scale = 0.5) {
    std::normal_distribution<double> N01;
    auto p = hotspot::ModelParams::zeros(ds.alpha_dim(), ds.num_regions());
    for (Eigen::Index k = 0; k < p.alpha.size(); ++k) p.alpha[k] = scale * N01(rng);
    for (Eigen::Index i = 0; i < p.beta.size(); ++i) {
        p.beta[i] = scale * N01(rng);
        p.gamma[i] = (i % 3 == 0) ? scale * N01(rng) : 0.0;
    }
    return p;
}

}  // namespace testing

#include "hotspot/bootstrap.hpp"

#include "hotspot/error.hpp"
#include "hotspot/parallel.hpp"
#include "hotspot/report.hpp"
#include "hotspot/rng.hpp"
#include "hotspot/stats.hpp"

namespace hotspot {

Dataset bootstrap_resample(const Dataset& ds, std::uint64_t seed, int b, int max_region_attempts) {
    CounterRng rng(seed, {hash_name("bootstrap"), static_cast<std::uint64_t>(b)});
    const auto& subjects = ds.subjects();
    std::vector<SubjectRecord> out;
    out.reserve(subjects.size());
    for (std::size_t i = 0; i < ds.num_regions(); ++i) {
        const auto& mem = ds.members(i);
        std::vector<std::size_t> pick(mem.size());
        for (int attempt = 0;; ++attempt) {
            double w = 0.0, wy = 0.0;
            for (auto& p : pick) {
                p = mem[rng.below(mem.size())];
                const auto& s = subjects[p];
                if (s.observed) {
                    w += s.weight;
                    wy += s.weight * s.outcome;
                }
            }
            if (w > 0.0 && wy > 0.0 && wy < w) break;
            if (attempt + 1 >= max_region_attempts) {
                throw InvalidInput("bootstrap", "region '" + ds.regions()[i].region_id + "' drew " +
                                                    std::to_string(max_region_attempts) +
                                                    " resamples without both outcomes among observed subjects");
            }
        }
        for (auto p : pick) out.push_back(subjects[p]);
    }
    return Dataset(ds.regions(), std::move(out), ds.subject_covariate_names(), ds.region_covariate_names());
}

BootstrapResult bootstrap(const Dataset& ds, const FusionGraph& graph, const PenaltyConfig& pen,
                          const SolverConfig& cfg, const FitResult& reference, const BootstrapOptions& opt) {
    if (opt.replicates < 1) throw InvalidInput("bootstrap", "number of replicates must be positive");
    if (!(opt.level > 0.0 && opt.level < 1.0)) throw InvalidInput("bootstrap", "level must lie in (0, 1)");
    const auto B = static_cast<std::size_t>(opt.replicates);
    const std::size_t K = ds.num_regions();
    const auto p = static_cast<std::size_t>(ds.alpha_dim());

    std::vector<ModelParams> fits(B);
    std::vector<std::vector<double>> adjusted(B);
    parallel_for(B, opt.threads, [&](std::size_t b) {
        const Dataset rs = bootstrap_resample(ds, opt.seed, static_cast<int>(b), opt.max_region_attempts);
        const auto* warm = reference.fuse_state.subgradient.size() ? &reference.fuse_state : nullptr;
        FitResult f = fit(rs, graph, pen, cfg, reference.params, warm);
        adjusted[b] = adjusted_rates(rs, f.params);
        fits[b] = std::move(f.params);
    });

    const double lo = (1.0 - opt.level) / 2.0, hi = 1.0 - lo;
    auto interval = [&](double estimate, const std::vector<double>& draws) {
        return PercentileInterval{estimate, quantile(draws, lo), quantile(draws, hi)};
    };
    BootstrapResult res;
    res.replicates = opt.replicates;
    const auto ref_adjusted = adjusted_rates(ds, reference.params);
    std::vector<double> draws(B);
    for (std::size_t k = 0; k < p; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        for (std::size_t b = 0; b < B; ++b) draws[b] = fits[b].alpha[kk];
        res.alpha.push_back(interval(reference.params.alpha[kk], draws));
    }
    for (std::size_t i = 0; i < K; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        int hits = 0;
        for (std::size_t b = 0; b < B; ++b) {
            hits += fits[b].gamma[ii] != 0.0;
            draws[b] = expit(fits[b].beta[ii]);
        }
        res.detection_frequency.push_back(static_cast<double>(hits) / static_cast<double>(B));
        res.baseline_rate.push_back(interval(expit(reference.params.beta[ii]), draws));
        for (std::size_t b = 0; b < B; ++b) draws[b] = adjusted[b][i];
        res.adjusted_rate.push_back(interval(ref_adjusted[i], draws));
    }
    return res;
}

}  // namespace hotspot

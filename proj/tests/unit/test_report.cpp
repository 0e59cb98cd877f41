#include <doctest.h>

#include <random>
#include <sstream>

#include "helpers.hpp"
#include "hotspot/bootstrap.hpp"
#include "hotspot/error.hpp"
#include "hotspot/report.hpp"
#include "hotspot/simbench.hpp"
#include "hotspot/solver.hpp"
#include "hotspot/stats.hpp"

using namespace hotspot;

TEST_SUITE("report") {
    TEST_CASE("flags follow the sign of gamma") {
        std::mt19937_64 rng(1);
        const Dataset ds = testing::random_dataset(rng, 4, 10);
        ModelParams p = ModelParams::zeros(ds.alpha_dim(), 4);
        for (const auto& row : build_report(ds, p)) CHECK(row.flag == OutlierFlag::none);
        p.gamma << 0.0, 0.7, -0.3, 0.0;
        const auto rows = build_report(ds, p);
        CHECK(rows[0].flag == OutlierFlag::none);
        CHECK(rows[1].flag == OutlierFlag::above);
        CHECK(rows[2].flag == OutlierFlag::below);
        CHECK(rows[1].gamma_hat == 0.7);
        CHECK(rows[1].n == 10);
        CHECK_FALSE(rows[0].detection_frequency.has_value());
        CHECK(parse_flag(flag_name(OutlierFlag::below)) == OutlierFlag::below);
        CHECK_THROWS_AS(parse_flag("sideways"), InvalidInput);
    }

    TEST_CASE("rates") {
        std::mt19937_64 rng(2);
        SUBCASE("without covariates the adjusted rate is the baseline rate") {
            const Dataset ds = testing::random_dataset(rng, 3, 12, 0, 0);
            ModelParams p = ModelParams::zeros(0, 3);
            p.beta << -1.0, 0.0, 0.5;
            p.gamma << 2.0, 0.0, 0.0;
            for (const auto& row : build_report(ds, p)) CHECK(row.adjusted_rate == doctest::Approx(row.baseline_rate));
            CHECK(build_report(ds, p)[0].baseline_rate == doctest::Approx(expit(-1.0)));
        }
        SUBCASE("crude above adjusted when gamma is positive and fitted exactly") {
            // One region, no covariates: the crude rate is expit(beta + gamma) at the MLE.
            std::vector<SubjectRecord> s;
            for (int j = 0; j < 10; ++j) s.push_back({0, j < 6, 1, 1.0, {}});
            for (int j = 0; j < 10; ++j) s.push_back({1, j < 3, 1, 1.0, {}});
            const Dataset ds({{"a", {0.0}, {}}, {"b", {1.0}, {}}}, s);
            ModelParams p = ModelParams::zeros(0, 2);
            p.beta << logit(0.3), logit(0.3);
            p.gamma << logit(0.6) - logit(0.3), 0.0;
            const auto rows = build_report(ds, p);
            CHECK(rows[0].crude_rate == doctest::Approx(0.6));
            CHECK(rows[0].adjusted_rate == doctest::Approx(0.3));
            CHECK(rows[0].crude_rate > rows[0].adjusted_rate);
            CHECK(rows[0].flag == OutlierFlag::above);
        }
        SUBCASE("adjusted rate against a direct average") {
            const Dataset ds = testing::random_dataset(rng, 3, 15, 2, 1, true, true);
            const ModelParams p = testing::random_params(rng, ds, 0.5);
            const auto adj = adjusted_rates(ds, p);
            for (std::size_t i = 0; i < 3; ++i) {
                double num = 0.0, den = 0.0;
                for (auto j : ds.members(i)) {
                    const auto& sj = ds.subjects()[j];
                    if (!sj.observed) continue;
                    num += sj.weight * expit(ds.design_row(j).dot(p.alpha) + p.beta[Eigen::Index(i)]);
                    den += sj.weight;
                }
                CHECK(adj[i] == doctest::Approx(num / den).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("csv round trip is exact") {
        std::vector<ReportRow> rows{
            {"north, upper", 12, 0.1, 1.0 / 3.0, 0.30000000000000004, 1e-300, OutlierFlag::above, 0.25},
            {"say \"hi\"", 3, 2.0 / 3.0, 0.5, 0.5, -2.5, OutlierFlag::below, std::nullopt},
            {"plain", 7, 0.5, 0.5, 0.5, 0.0, OutlierFlag::none, 1.0}};
        std::ostringstream os;
        write_report_csv(os, rows);
        CHECK(os.str().rfind("region_id,n,crude_rate,baseline_rate,adjusted_rate,gamma_hat,outlier_flag,"
                             "detection_frequency\n",
                             0) == 0);
        std::istringstream is(os.str());
        CHECK(read_report_csv(is) == rows);
        std::istringstream bad("region_id,n\nx,1\n");
        CHECK_THROWS_AS(read_report_csv(bad), InvalidInput);
    }
}

TEST_SUITE("bootstrap") {
    TEST_CASE("resamples keep region sizes and are reproducible") {
        std::mt19937_64 rng(3);
        const Dataset ds = testing::random_dataset(rng, 5, 30, 1, 1, true);
        const Dataset a = bootstrap_resample(ds, 11, 0);
        const Dataset b = bootstrap_resample(ds, 11, 0);
        const Dataset c = bootstrap_resample(ds, 11, 1);
        bool differs = false;
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(a.region_size(i) == 30);
            CHECK(a.region_weight(i) == b.region_weight(i));
            differs = differs || a.crude_rate(i) != c.crude_rate(i);
        }
        CHECK(differs);
    }

    TEST_CASE("degenerate resamples are redrawn, then reported") {
        std::vector<SubjectRecord> s;
        std::vector<RegionRecord> regions;
        for (std::size_t i = 0; i < 12; ++i) {
            regions.push_back({"g" + std::to_string(i), {double(i)}, {}});
            s.push_back({i, 1, 1, 1.0, {}});
            s.push_back({i, 0, 1, 1.0, {}});
        }
        const Dataset ds(regions, s);
        // Each two-subject region is degenerate with probability 1/2 per draw.
        CHECK_THROWS_AS(bootstrap_resample(ds, 1, 0, 1), InvalidInput);
        CHECK_NOTHROW(bootstrap_resample(ds, 1, 0, 100));
    }

    TEST_CASE("frequencies, determinism and a strong outlier") {
        Scenario sc = Scenario::parse("K20n100o5");
        sc.spatial_trend = false;
        sc.outlier_magnitude = -2.5;
        const auto inst = generate(sc, 0);
        const PenaltyConfig pen{0.25, 0.5};
        const auto ref = fit(inst.data, inst.graph, pen);
        BootstrapOptions one;
        one.replicates = 1;
        const auto r1 = bootstrap(inst.data, inst.graph, pen, {}, ref, one);
        for (double f : r1.detection_frequency) CHECK((f == 0.0 || f == 1.0));

        BootstrapOptions opts;
        opts.replicates = 100;
        opts.seed = 5;
        const auto a = bootstrap(inst.data, inst.graph, pen, {}, ref, opts);
        opts.threads = 2;
        const auto b = bootstrap(inst.data, inst.graph, pen, {}, ref, opts);
        CHECK(a.detection_frequency == b.detection_frequency);
        std::size_t planted = 0;
        for (std::size_t i = 0; i < 20; ++i) {
            if (inst.outlier[i]) planted = i;
        }
        MESSAGE("planted outlier detection frequency " << a.detection_frequency[planted]);
        CHECK(a.detection_frequency[planted] >= 0.7);
        for (std::size_t k = 0; k < a.alpha.size(); ++k) {
            CHECK(a.alpha[k].low <= a.alpha[k].high);
            CHECK(a.alpha[k].estimate == ref.params.alpha[Eigen::Index(k)]);
        }
        for (const auto& iv : a.baseline_rate) {
            CHECK(iv.low <= iv.high);
            CHECK(iv.low > 0.0);
            CHECK(iv.high < 1.0);
        }
    }
}

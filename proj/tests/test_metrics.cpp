#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "wps/analysis.hpp"
#include "wps/metrics.hpp"

using namespace wps;
using namespace testing_support;

TEST(Summarize, Singleton) {
    std::vector<double> xs{5.0};
    auto s = summarize(xs);
    EXPECT_EQ(s.n, 1u);
    EXPECT_EQ(s.mean, 5.0);
    EXPECT_EQ(s.sd, 0.0);
    EXPECT_FALSE(s.sd_defined);
    EXPECT_EQ(s.min, 5.0);
    EXPECT_EQ(s.max, 5.0);
}

TEST(Summarize, HandComputed) {
    std::vector<double> xs{1, 2, 3};
    auto s = summarize(xs);
    EXPECT_DOUBLE_EQ(s.mean, 2.0);
    EXPECT_DOUBLE_EQ(s.sd, 1.0);
    EXPECT_TRUE(s.sd_defined);
    EXPECT_THROW(summarize(std::vector<double>{}), std::invalid_argument);
}

TEST(Summarize, ShiftAndScale) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> u(-1000, 1000);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> xs, shifted, scaled;
        const double c = u(rng) / 4.0;
        for (int i = 0; i < 2 + trial % 30; ++i) xs.push_back(u(rng) / 4.0);
        for (double x : xs) {
            shifted.push_back(x + c);
            scaled.push_back(x * 2.0);
        }
        auto a = summarize(xs), b = summarize(shifted), d = summarize(scaled);
        ASSERT_NEAR(b.mean, a.mean + c, 1e-12);
        ASSERT_EQ(b.min, a.min + c);
        ASSERT_EQ(b.max, a.max + c);
        ASSERT_NEAR(b.sd, a.sd, 1e-12 * std::max(1.0, a.sd));
        ASSERT_NEAR(d.mean, 2.0 * a.mean, 1e-12);
        ASSERT_NEAR(d.sd, 2.0 * a.sd, 1e-12 * std::max(1.0, a.sd));
        ASSERT_LE(a.min, a.mean);
        ASSERT_LE(a.mean, a.max);
    }
}

TEST(Histogram, ManualBinning) {
    auto h = histogram(std::vector<double>{0.1, 0.3, 0.6}, 0.0, 1.0, 0.5);
    EXPECT_EQ(h.counts, (std::vector<std::size_t>{2, 1}));
    EXPECT_EQ(h.bin_edges, (std::vector<double>{0.0, 0.5, 1.0}));
}

TEST(Histogram, EmptyAndEdges) {
    auto h = histogram(std::vector<double>{}, 0.0, 3.5, 0.5);
    EXPECT_EQ(h.counts, std::vector<std::size_t>(7, 0));
    EXPECT_FALSE(h.modal_bin());
    auto e = histogram(std::vector<double>{0.0, 0.5, 3.5, -0.1, 3.6}, 0.0, 3.5, 0.5);
    EXPECT_EQ(e.counts[0], 1u);
    EXPECT_EQ(e.counts[1], 1u);
    EXPECT_EQ(e.counts[6], 1u);  // last bin is closed
    EXPECT_EQ(e.underflow, 1u);
    EXPECT_EQ(e.overflow, 1u);
    EXPECT_THROW(histogram(std::vector<double>{}, 0.0, 1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(histogram(std::vector<double>{}, 0.0, 1.0, 0.3), std::invalid_argument);
}

TEST(Histogram, CountsPlusOutOfRangeEqualSamples) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(1.5, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> xs(static_cast<std::size_t>(trial));
        for (auto& x : xs) x = n(rng);
        auto h = histogram(xs, 0.0, 3.5, 0.5);
        ASSERT_EQ(h.total(), xs.size());
    }
}

TEST(Ols, ConstantY) {
    std::vector<std::pair<double, double>> pts{{1, 3}, {2, 3}, {5, 3}};
    auto f = ols_fit(pts);
    EXPECT_NEAR(f.slope, 0.0, 1e-15);
    EXPECT_NEAR(f.intercept, 3.0, 1e-15);
    EXPECT_EQ(f.r_squared, 1.0);
}

TEST(Ols, ReferenceEndpoints) {
    std::vector<std::pair<double, double>> pts{{1, 9.5}, {10, 4.5}};
    auto f = ols_fit(pts);
    EXPECT_NEAR(f.slope, -5.0 / 9.0, 1e-12);
    EXPECT_NEAR(f.intercept, 9.5 + 5.0 / 9.0, 1e-12);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(Ols, Errors) {
    EXPECT_THROW(ols_fit(std::vector<std::pair<double, double>>{{1, 1}}), std::invalid_argument);
    EXPECT_THROW(ols_fit(std::vector<std::pair<double, double>>{{1, 1}, {1, 2}}), std::invalid_argument);
}

TEST(Ols, ResidualsOrthogonalAndBruteForce) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-10, 10);
    std::normal_distribution<double> noise(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::pair<double, double>> pts;
        const double a = u(rng), b = u(rng) / 2;
        for (int i = 0; i < 20; ++i) {
            double x = u(rng);
            pts.emplace_back(x, a + b * x + noise(rng));
        }
        auto f = ols_fit(pts);
        double mx = 0.0, dot = 0.0;
        for (auto [x, y] : pts) mx += x / 20.0;
        for (auto [x, y] : pts) dot += (y - f.at(x)) * (x - mx);
        EXPECT_NEAR(dot, 0.0, 1e-9);
        auto [bb, ba] = brute_force_line(pts);
        EXPECT_NEAR(f.slope, bb, 1e-6);
        EXPECT_NEAR(f.intercept, ba, 1e-6);
        EXPECT_GE(f.r_squared, 0.0);
        EXPECT_LE(f.r_squared, 1.0);
    }
}

TEST(SignTest, KnownValues) {
    EXPECT_DOUBLE_EQ(sign_test_p(0, 10), 1.0);
    EXPECT_NEAR(sign_test_p(10, 10), 1.0 / 1024.0, 1e-15);
    EXPECT_NEAR(sign_test_p(9, 10), 11.0 / 1024.0, 1e-15);
    EXPECT_THROW(sign_test_p(3, 2), std::invalid_argument);
}

TEST(Compare, PassFailAndAbsent) {
    Aggregates m{{"accuracy_mean_CNN", 95.3}, {"regression_slope", -0.60}};
    auto rows = compare_to_reference(m);
    EXPECT_EQ(rows.size(), reference_criteria().size());
    for (const auto& r : rows) {
        if (r.metric == "accuracy_mean_CNN" || r.metric == "regression_slope") {
            EXPECT_TRUE(r.pass) << r.metric;
        } else if (r.metric == "failure_mean_industry") {
            EXPECT_FALSE(r.pass);
            EXPECT_EQ(r.reason, "absent");
        }
    }
    Aggregates off{{"accuracy_mean_CNN", 93.5}};
    EXPECT_EQ(compare_to_reference(off).front().reason, "out of tolerance");
}

TEST(Analyze, HandCraftedThreeRows) {
    std::vector<RunRecord> runs{
        {0, "proposed", "CNN", 1, 10, 94.0, 0.5, 10.0, 100, 5, true},
        {1, "proposed", "CNN", 1, 11, 96.0, 0.3, 10.0, 100, 6, true},
        {2, "industry", "CNN", 1, 12, 93.0, 2.7, 10.0, 100, 5, true},
    };
    auto an = analyze_runs(runs);
    const auto& s = an.summary;
    EXPECT_EQ(s["runs"]["total"], 3);
    EXPECT_DOUBLE_EQ(s["accuracy_by_classifier"]["CNN"]["mean"].get<double>(), 95.0);
    EXPECT_DOUBLE_EQ(s["accuracy_by_classifier"]["CNN"]["sd"].get<double>(), std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(s["failure_rate_by_system"]["proposed"]["mean"].get<double>(), 0.4);
    EXPECT_DOUBLE_EQ(s["failure_rate_by_system"]["industry"]["mean"].get<double>(), 2.7);
    EXPECT_FALSE(s["failure_rate_by_system"]["industry"]["sd_defined"].get<bool>());
    EXPECT_DOUBLE_EQ(s["failure_disjoint_fraction"].get<double>(), 1.0);
    EXPECT_DOUBLE_EQ(an.aggregates.at("failure_mode_bin_industry"), 2.5);
    EXPECT_DOUBLE_EQ(an.aggregates.at("failure_mode_bin_proposed"), 0.0);
    EXPECT_TRUE(s["regression"].is_null());
    EXPECT_EQ(an.comparison.size(), reference_criteria().size());
}

TEST(Analyze, BalancedRegressionAndSignTest) {
    std::vector<RunRecord> runs;
    std::int64_t id = 0;
    // Extra level-1 runs first, as the default study plan produces.
    for (int r = 0; r < 5; ++r) runs.push_back({id++, "proposed", "CNN", 1, 0, 95, 0.5, 10.0, 1, 1, true});
    for (int level = 1; level <= 10; ++level)
        for (int r = 0; r < 3; ++r)
            runs.push_back({id++, "proposed", "CNN", level, 0, 95, 0.5, 10.0 - 0.5 * (level - 1) - 0.01 * r, 1, 1, true});
    auto an = analyze_runs(runs);
    ASSERT_TRUE(an.regression);
    EXPECT_EQ(an.regression->n, 30u);
    EXPECT_NEAR(an.regression->slope, -0.5, 0.01);
    EXPECT_NEAR(an.summary["sign_test"]["p_max"].get<double>(), 1.0 / 8.0, 1e-12);
}

TEST(Analyze, InvalidRunsAreExcluded) {
    std::vector<RunRecord> runs{
        {0, "proposed", "CNN", 1, 10, 94.0, 0.5, 10.0, 100, 5, true},
        {1, "proposed", "CNN", 1, 11, 0, 0, 0, 100, 0, false},
    };
    auto an = analyze_runs(runs);
    EXPECT_EQ(an.summary["runs"]["invalid"], 1);
    EXPECT_EQ(an.summary["accuracy_by_classifier"]["CNN"]["n"], 1);
}

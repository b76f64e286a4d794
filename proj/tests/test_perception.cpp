#include <gtest/gtest.h>

#include "support.hpp"
#include "wps/perception.hpp"

using namespace wps;
using namespace testing_support;

TEST(BuiltinSpec, TableRows) {
    EXPECT_EQ(builtin_spec("CNN"), (ClassifierSpec{"CNN", 95, 3, 88, 100}));
    EXPECT_EQ(builtin_spec("RNN"), (ClassifierSpec{"RNN", 90, 5, 80, 97}));
    EXPECT_EQ(builtin_spec("Traditional"), (ClassifierSpec{"Traditional", 75, 7, 60, 85}));
    EXPECT_THROW(builtin_spec("SVM"), std::invalid_argument);
}

TEST(Spec, Validation) {
    EXPECT_THROW((ClassifierSpec{"X", 50, 3, 60, 70}.validate()), std::invalid_argument);
    EXPECT_THROW((ClassifierSpec{"X", 65, 0, 60, 70}.validate()), std::invalid_argument);
    EXPECT_THROW((ClassifierSpec{"X", 65, 3, 60, 101}.validate()), std::invalid_argument);
}

TEST(TruncatedMean, MatchesQuadrature) {
    for (auto [mu, sd, lo, hi] : std::vector<std::array<double, 4>>{
             {95, 3, 88, 100}, {90, 5, 80, 97}, {75, 7, 60, 85}, {50, 20, 0, 100}, {99, 1, 90, 100}}) {
        EXPECT_NEAR(truncated_normal_mean(mu, sd, lo, hi), truncated_mean_quadrature(mu, sd, lo, hi), 1e-7);
    }
}

TEST(TruncatedMean, CalibratedLocationHitsReferenceMean) {
    for (const char* name : {"CNN", "RNN", "Traditional"}) {
        auto spec = builtin_spec(name);
        const double loc = calibrated_location(spec);
        EXPECT_NEAR(truncated_mean_quadrature(loc, spec.sd_acc, spec.min_acc, spec.max_acc), spec.mean_acc, 1e-6) << name;
    }
}

TEST(Instantiate, DegenerateSpec) {
    Rng rng = make_rng(1, Stream::Perception);
    ClassifierSpec perfect{"Perfect", 100, 1, 100, 100};
    for (int i = 0; i < 10; ++i) EXPECT_EQ(instantiate(perfect, rng).run_accuracy, 1.0);
}

TEST(Instantiate, CnnMeanAndBounds) {
    Rng rng = make_rng(2024, Stream::Perception);
    const auto spec = builtin_spec("CNN");
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) {
        double a = instantiate(spec, rng).run_accuracy;
        ASSERT_GE(a, 0.88);
        ASSERT_LE(a, 1.0);
        sum += a;
    }
    EXPECT_NEAR(100.0 * sum / 10000.0, 95.0, 0.1);
}

TEST(Instantiate, AllSpecsStayInBand) {
    for (const char* name : {"RNN", "Traditional"}) {
        Rng rng = make_rng(77, Stream::Perception);
        const auto spec = builtin_spec(name);
        for (int i = 0; i < 5000; ++i) {
            double a = 100.0 * instantiate(spec, rng).run_accuracy;
            ASSERT_GE(a, spec.min_acc);
            ASSERT_LE(a, spec.max_acc);
        }
    }
}

TEST(Instantiate, SeedDeterminism) {
    Rng a = make_rng(5, Stream::Perception), b = make_rng(5, Stream::Perception);
    EXPECT_EQ(instantiate(builtin_spec("RNN"), a).run_accuracy, instantiate(builtin_spec("RNN"), b).run_accuracy);
}

TEST(Classify, Extremes) {
    Rng rng = make_rng(3, Stream::Perception);
    const std::vector<Sku> decoys{"B", "C"};
    for (int i = 0; i < 1000; ++i) {
        EXPECT_EQ(classify(1.0, "A", decoys, rng), "A");
        EXPECT_NE(classify(0.0, "A", decoys, rng), "A");
    }
}

TEST(Classify, EmpiricalRate) {
    Rng rng = make_rng(4, Stream::Perception);
    const std::vector<Sku> decoys{"B", "C", "D"};
    int correct = 0;
    for (int i = 0; i < 10000; ++i) correct += classify(0.95, "A", decoys, rng) == "A";
    EXPECT_GE(correct / 10000.0, 0.9435);
    EXPECT_LE(correct / 10000.0, 0.9565);
}

TEST(Classify, DecoyErrors) {
    Rng rng = make_rng(5, Stream::Perception);
    EXPECT_THROW(classify(0.5, "A", std::vector<Sku>{}, rng), std::invalid_argument);
    EXPECT_THROW(classify(0.5, "A", std::vector<Sku>{"A", "B"}, rng), std::invalid_argument);
}

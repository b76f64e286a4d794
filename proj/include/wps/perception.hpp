#pragma once

// Stochastic stand-ins for the item-recognition models. Each run draws one
// realized accuracy from a truncated normal; each pick attempt then identifies
// the item correctly with that probability.

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wps/rng.hpp"
#include "wps/warehouse.hpp"

namespace wps {

struct ClassifierSpec {
    std::string name;
    double mean_acc = 0.0;  // percent
    double sd_acc = 0.0;
    double min_acc = 0.0;
    double max_acc = 0.0;

    void validate() const {
        if (!(0.0 <= min_acc && min_acc <= mean_acc && mean_acc <= max_acc && max_acc <= 100.0))
            throw std::invalid_argument("classifier " + name + ": require 0 <= min <= mean <= max <= 100");
        if (!(sd_acc > 0.0)) throw std::invalid_argument("classifier " + name + ": sd must be positive");
    }
    bool operator==(const ClassifierSpec&) const = default;
};

inline ClassifierSpec builtin_spec(const std::string& name) {
    if (name == "CNN") return {"CNN", 95.0, 3.0, 88.0, 100.0};
    if (name == "RNN") return {"RNN", 90.0, 5.0, 80.0, 97.0};
    if (name == "Traditional") return {"Traditional", 75.0, 7.0, 60.0, 85.0};
    throw std::invalid_argument("unknown classifier '" + name + "' (expected CNN, RNN or Traditional)");
}

namespace detail {

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace detail

/// Mean of N(location, sd) conditioned on [lo, hi].
inline double truncated_normal_mean(double location, double sd, double lo, double hi) {
    const double a = (lo - location) / sd;
    const double b = (hi - location) / sd;
    const double mass = detail::normal_cdf(b) - detail::normal_cdf(a);
    if (mass <= 0.0) return location < lo ? lo : hi;
    return location + sd * (detail::normal_pdf(a) - detail::normal_pdf(b)) / mass;
}

/// Location of the parent normal whose truncation to [min, max] has mean
/// `mean_acc`. Truncation pulls the mean toward the wider tail, so sampling
/// N(mean, sd) directly would miss the target mean by up to a point.
/// The search is bounded to keep rejection sampling efficient.
inline double calibrated_location(const ClassifierSpec& spec) {
    double lo = spec.min_acc - 2.0 * spec.sd_acc;
    double hi = spec.max_acc + 2.0 * spec.sd_acc;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (truncated_normal_mean(mid, spec.sd_acc, spec.min_acc, spec.max_acc) < spec.mean_acc)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct ClassifierInstance {
    ClassifierSpec spec;
    double run_accuracy = 1.0;  // probability in [min/100, max/100]
};

/// Rejection-sampled truncated normal; values are never clipped.
inline ClassifierInstance instantiate(const ClassifierSpec& spec, Rng& rng) {
    spec.validate();
    if (spec.min_acc == spec.max_acc) return {spec, spec.min_acc / 100.0};
    std::normal_distribution<double> parent(calibrated_location(spec), spec.sd_acc);
    for (;;) {
        double v = parent(rng);
        if (v >= spec.min_acc && v <= spec.max_acc) return {spec, v / 100.0};
    }
}

/// Returns `true_sku` with probability `accuracy`, otherwise a uniform decoy.
inline Sku classify(double accuracy, const Sku& true_sku, std::span<const Sku> decoys, Rng& rng) {
    if (decoys.empty()) throw std::invalid_argument("classify needs at least one decoy");
    if (std::find(decoys.begin(), decoys.end(), true_sku) != decoys.end())
        throw std::invalid_argument("decoys must not contain the true SKU");
    if (uniform01(rng) < accuracy) return true_sku;
    std::uniform_int_distribution<std::size_t> pick(0, decoys.size() - 1);
    return decoys[pick(rng)];
}

inline Sku classify(const ClassifierInstance& inst, const Sku& true_sku, std::span<const Sku> decoys, Rng& rng) {
    return classify(inst.run_accuracy, true_sku, decoys, rng);
}

}  // namespace wps

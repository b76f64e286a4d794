#pragma once

// Statistical kernel: summary statistics, fixed-width histograms, simple OLS,
// a sign test, and the claim-checking layer that grades measured aggregates
// against reference values.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wps {

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct RunRecord {
    std::int64_t run_id = 0;
    std::string system;
    std::string classifier;
    int severity = 1;
    std::uint64_t seed = 0;
    double accuracy_pct = 0.0;
    double failure_rate_pct = 0.0;
    double performance_score = 0.0;
    std::int64_t steps = 0;
    std::int64_t orders_completed = 0;
    bool valid = true;  // false when the run made no pick attempts

    bool operator==(const RunRecord&) const = default;
};

struct SummaryStats {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;  // sample sd (n - 1)
    double min = 0.0;
    double max = 0.0;
    bool sd_defined = false;  // false for n == 1
};

inline SummaryStats summarize(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("summarize needs at least one sample");
    SummaryStats s;
    s.n = xs.size();
    s.min = *std::min_element(xs.begin(), xs.end());
    s.max = *std::max_element(xs.begin(), xs.end());
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(s.n);
    // Guard against the last-ulp drift of the running sum.
    s.mean = std::clamp(s.mean, s.min, s.max);
    if (s.n >= 2) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
        s.sd_defined = true;
    }
    return s;
}

struct Histogram {
    std::vector<double> bin_edges;
    std::vector<std::size_t> counts;
    std::size_t underflow = 0;
    std::size_t overflow = 0;

    std::size_t total() const {
        std::size_t n = underflow + overflow;
        for (auto c : counts) n += c;
        return n;
    }

    /// Index of the fullest bin; earliest wins ties. nullopt when all bins are empty.
    std::optional<std::size_t> modal_bin() const {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < counts.size(); ++i)
            if (counts[i] > 0 && (!best || counts[i] > counts[*best])) best = i;
        return best;
    }
};

/// Bins [lo, lo+w), ..., [hi-w, hi]. Samples outside [lo, hi] land in the
/// underflow/overflow tallies, never silently dropped.
inline Histogram histogram(std::span<const double> xs, double lo, double hi, double bin_width) {
    if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be positive");
    if (!(lo < hi)) throw std::invalid_argument("histogram range requires lo < hi");
    const double nbins_real = (hi - lo) / bin_width;
    const auto nbins = static_cast<std::size_t>(std::llround(nbins_real));
    if (nbins == 0 || std::abs(nbins_real - static_cast<double>(nbins)) > 1e-9)
        throw std::invalid_argument("bin width must divide the histogram range");

    Histogram h;
    for (std::size_t i = 0; i <= nbins; ++i) h.bin_edges.push_back(lo + bin_width * static_cast<double>(i));
    h.bin_edges.back() = hi;
    h.counts.assign(nbins, 0);
    for (double x : xs) {
        if (x < lo) {
            ++h.underflow;
        } else if (x > hi) {
            ++h.overflow;
        } else {
            auto i = static_cast<std::size_t>(std::upper_bound(h.bin_edges.begin(), h.bin_edges.end(), x) -
                                              h.bin_edges.begin());
            h.counts[std::min(i, nbins) - 1] += 1;
        }
    }
    return h;
}

struct RegressionFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t n = 0;

    double at(double x) const { return intercept + slope * x; }
};

inline RegressionFit ols_fit(std::span<const std::pair<double, double>> pts) {
    if (pts.size() < 2) throw std::invalid_argument("ols_fit needs at least 2 points");
    const auto n = static_cast<double>(pts.size());
    double mx = 0.0, my = 0.0;
    for (auto [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (auto [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("ols_fit needs at least 2 distinct x values");

    RegressionFit f;
    f.n = pts.size();
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0.0;
    for (auto [x, y] : pts) {
        double e = y - f.at(x);
        ss_res += e * e;
    }
    if (syy == 0.0) {
        // Constant y: the fit is exact up to rounding.
        if (ss_res > 1e-18 * std::max(1.0, my * my) * n) throw std::domain_error("r_squared undefined");
        f.r_squared = 1.0;
    } else {
        f.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return f;
}

/// One-sided sign test: P(X >= successes) for X ~ Binomial(trials, 1/2).
inline double sign_test_p(std::size_t successes, std::size_t trials) {
    if (successes > trials) throw std::invalid_argument("successes exceed trials");
    double p = 0.0;
    for (std::size_t k = successes; k <= trials; ++k) {
        double log_c = std::lgamma(static_cast<double>(trials) + 1) - std::lgamma(static_cast<double>(k) + 1) -
                       std::lgamma(static_cast<double>(trials - k) + 1);
        p += std::exp(log_c - static_cast<double>(trials) * std::log(2.0));
    }
    return std::min(1.0, p);
}

// --- claim checking ---------------------------------------------------------

/// How a measured value is graded against its reference.
enum class Check {
    AbsTol,     // |measured - reference| <= tolerance
    RelTol,     // |measured - reference| <= tolerance * |reference|
    Range,      // lo <= measured <= hi
    AtLeast,    // measured >= lo
    LessThan,   // measured < hi
    EqualsBin,  // measured bin lower edge == reference
};

struct Criterion {
    std::string criterion;  // acceptance criterion the metric belongs to
    std::string metric;
    double reference = 0.0;
    Check check = Check::AbsTol;
    double tolerance = 0.0;
    double lo = 0.0;
    double hi = 0.0;

    std::string tolerance_text() const {
        switch (check) {
            case Check::AbsTol: return "+/-" + format_number(tolerance);
            case Check::RelTol: return "rel+/-" + format_number(tolerance);
            case Check::Range: return format_number(lo) + ".." + format_number(hi);
            case Check::AtLeast: return ">=" + format_number(lo);
            case Check::LessThan: return "<" + format_number(hi);
            case Check::EqualsBin: return "bin";
        }
        return "";
    }
};

struct ComparisonRow {
    std::string criterion;
    std::string metric;
    double reference = 0.0;
    std::optional<double> measured;
    std::string tolerance;
    bool pass = false;
    std::string reason;
};

/// Measured aggregates keyed by metric name.
using Aggregates = std::map<std::string, double>;

inline bool grade(const Criterion& c, double v) {
    switch (c.check) {
        case Check::AbsTol: return std::abs(v - c.reference) <= c.tolerance;
        case Check::RelTol: return std::abs(v - c.reference) <= c.tolerance * std::abs(c.reference);
        case Check::Range: return v >= c.lo && v <= c.hi;
        case Check::AtLeast: return v >= c.lo;
        case Check::LessThan: return v < c.hi;
        case Check::EqualsBin: return std::abs(v - c.reference) < 1e-9;
    }
    return false;
}

/// Reference values and tolerances for everything the runs table can show.
inline std::vector<Criterion> reference_criteria() {
    const std::string t1 = "classifier_accuracy", t2 = "failure_rates", t4 = "fault_rate_modes", t35 = "severity_regression";
    return {
        {t1, "accuracy_mean_CNN", 95.0, Check::AbsTol, 1.0},
        {t1, "accuracy_mean_RNN", 90.0, Check::AbsTol, 1.0},
        {t1, "accuracy_mean_Traditional", 75.0, Check::AbsTol, 1.0},
        {t2, "failure_mean_proposed", 0.5, Check::Range, 0.0, 0.4, 0.6},
        {t2, "failure_mean_industry", 2.5, Check::Range, 0.0, 2.2, 2.8},
        {t2, "failure_disjoint_fraction", 1.0, Check::AtLeast, 0.0, 0.95},
        {t4, "failure_mode_bin_proposed", 0.0, Check::EqualsBin},
        {t4, "failure_mode_bin_industry", 2.5, Check::EqualsBin},
        {t35, "regression_slope", -5.0 / 9.0, Check::RelTol, 0.15},
        {t35, "regression_fit_at_1", 9.5, Check::AbsTol, 0.6},
        {t35, "regression_fit_at_10", 4.5, Check::AbsTol, 1.0},
        {t35, "monotone_sign_test_p", 0.0, Check::LessThan, 0.0, 0.0, 0.01},
    };
}

/// One row per criterion metric; missing aggregates fail with reason "absent".
inline std::vector<ComparisonRow> compare_to_reference(const Aggregates& measured,
                                                   const std::vector<Criterion>& criteria = reference_criteria()) {
    std::vector<ComparisonRow> rows;
    for (const auto& c : criteria) {
        ComparisonRow row{c.criterion, c.metric, c.reference, std::nullopt, c.tolerance_text(), false, ""};
        auto it = measured.find(c.metric);
        if (it == measured.end() || !std::isfinite(it->second)) {
            row.reason = "absent";
        } else {
            row.measured = it->second;
            row.pass = grade(c, it->second);
            row.reason = row.pass ? "" : "out of tolerance";
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace wps

#pragma once

// Aggregation of a runs table into the analysis artifacts (`wps analyze`) and
// the markdown report rendered from them (`wps report`).

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "wps/metrics.hpp"
#include "wps/perception.hpp"
#include "wps/serialize.hpp"

namespace wps {

// Labels the reference comparisons are keyed on.
inline const std::string kProposed = "proposed";
inline const std::string kIndustry = "industry";
inline const std::string kReferenceClassifier = "CNN";

inline constexpr double kHistLo = 0.0;
inline constexpr double kHistHi = 3.5;
inline constexpr double kHistWidth = 0.5;

struct SignTestPair {
    int from = 0;
    int to = 0;
    std::size_t successes = 0;
    std::size_t trials = 0;
    double p = 1.0;
};

struct Analysis {
    nlohmann::json summary;
    Aggregates aggregates;
    std::vector<std::string> hist_systems;
    std::map<std::string, Histogram> histograms;
    std::optional<RegressionFit> regression;
    std::vector<ComparisonRow> comparison;
};

namespace detail {

inline nlohmann::json stats_json(const SummaryStats& s) {
    return {{"n", s.n}, {"mean", s.mean}, {"sd", s.sd}, {"sd_defined", s.sd_defined}, {"min", s.min}, {"max", s.max}};
}

template <class Pred>
std::vector<const RunRecord*> select(const std::vector<RunRecord>& runs, Pred pred) {
    std::vector<const RunRecord*> out;
    for (const auto& r : runs)
        if (r.valid && pred(r)) out.push_back(&r);
    return out;
}

inline bool has_value(const std::vector<RunRecord>& runs, std::string RunRecord::*field, const std::string& v) {
    return std::any_of(runs.begin(), runs.end(), [&](const RunRecord& r) { return r.valid && r.*field == v; });
}

}  // namespace detail

/// Groups and aggregates a runs table.
///
/// Accuracy uses severity-1 runs of the proposed system (all systems when it
/// is absent). Failure rates use severity-1 runs of the reference classifier
/// (all classifiers when it is absent). The severity regression uses the
/// proposed system with the reference classifier, capped at the same number
/// of runs per level (lowest run_ids first) so no level dominates.
inline Analysis analyze_runs(const std::vector<RunRecord>& input) {
    using nlohmann::json;
    std::vector<RunRecord> runs = input;
    std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) { return a.run_id < b.run_id; });

    Analysis an;
    json& sum = an.summary;
    Aggregates& agg = an.aggregates;
    const auto valid = static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](auto& r) { return r.valid; }));
    sum["runs"] = {{"total", runs.size()}, {"valid", valid}, {"invalid", runs.size() - valid}};

    const bool any_proposed = detail::has_value(runs, &RunRecord::system, kProposed);
    const bool any_ref_cls = detail::has_value(runs, &RunRecord::classifier, kReferenceClassifier);

    // Classifier accuracy.
    std::map<std::string, std::vector<double>> acc;
    for (const auto* r : detail::select(runs, [&](const RunRecord& r) {
             return r.severity == 1 && (!any_proposed || r.system == kProposed);
         }))
        acc[r->classifier].push_back(r->accuracy_pct);
    sum["accuracy_by_classifier"] = json::object();
    std::size_t banded = 0, in_band = 0;
    for (const auto& [name, xs] : acc) {
        const SummaryStats s = summarize(xs);
        json j = detail::stats_json(s);
        agg["accuracy_mean_" + name] = s.mean;
        if (name == "CNN" || name == "RNN" || name == "Traditional") {
            const ClassifierSpec ref = builtin_spec(name);
            const auto inside = static_cast<std::size_t>(std::count_if(
                xs.begin(), xs.end(), [&](double x) { return x >= ref.min_acc && x <= ref.max_acc; }));
            j["in_band_fraction"] = static_cast<double>(inside) / static_cast<double>(xs.size());
            banded += xs.size();
            in_band += inside;
        }
        sum["accuracy_by_classifier"][name] = j;
    }
    // Informational only: measured pick rates carry binomial noise around the
    // drawn accuracy, so a few can sit just outside the band.
    if (banded > 0) sum["accuracy_in_band_fraction"] = static_cast<double>(in_band) / static_cast<double>(banded);

    // Failure rates by system.
    std::map<std::string, std::vector<double>> fail;
    for (const auto* r : detail::select(runs, [&](const RunRecord& r) {
             return r.severity == 1 && (!any_ref_cls || r.classifier == kReferenceClassifier);
         }))
        fail[r->system].push_back(r->failure_rate_pct);
    sum["failure_rate_by_system"] = json::object();
    for (const auto& [name, xs] : fail) {
        const SummaryStats s = summarize(xs);
        sum["failure_rate_by_system"][name] = detail::stats_json(s);
        agg["failure_mean_" + name] = s.mean;
    }
    if (fail.count(kProposed) && fail.count(kIndustry)) {
        const auto& p = fail[kProposed];
        const auto& q = fail[kIndustry];
        std::size_t below = 0;
        for (double a : p)
            for (double b : q) below += a < b;
        const double frac = static_cast<double>(below) / static_cast<double>(p.size() * q.size());
        sum["failure_disjoint_fraction"] = frac;
        agg["failure_disjoint_fraction"] = frac;
    }

    // Fault-rate histogram.
    json hist = {{"lo", kHistLo}, {"hi", kHistHi}, {"bin_width", kHistWidth}};
    for (const auto& [name, xs] : fail) {
        Histogram h = histogram(xs, kHistLo, kHistHi, kHistWidth);
        hist["bin_edges"] = h.bin_edges;
        json hj = {{"counts", h.counts}, {"underflow", h.underflow}, {"overflow", h.overflow}};
        if (auto m = h.modal_bin()) {
            hj["modal_bin_lo"] = h.bin_edges[*m];
            agg["failure_mode_bin_" + name] = h.bin_edges[*m];
        } else {
            hj["modal_bin_lo"] = nullptr;
        }
        hist["systems"][name] = hj;
        an.hist_systems.push_back(name);
        an.histograms.emplace(name, std::move(h));
    }
    if (an.histograms.empty()) hist["bin_edges"] = histogram({}, kHistLo, kHistHi, kHistWidth).bin_edges;
    sum["fault_histogram"] = hist;

    // Performance against severity.
    std::map<int, std::vector<const RunRecord*>> by_level;
    for (const auto* r : detail::select(runs, [&](const RunRecord& r) {
             return (!any_proposed || r.system == kProposed) && (!any_ref_cls || r.classifier == kReferenceClassifier);
         }))
        by_level[r->severity].push_back(r);
    sum["performance_by_severity"] = json::array();
    std::vector<std::pair<double, double>> means;
    for (const auto& [level, rs] : by_level) {
        std::vector<double> ys;
        for (const auto* r : rs) ys.push_back(r->performance_score);
        const SummaryStats s = summarize(ys);
        json j = detail::stats_json(s);
        j["severity"] = level;
        sum["performance_by_severity"].push_back(j);
        means.emplace_back(level, s.mean);
    }

    sum["regression"] = nullptr;
    sum["regression_on_means"] = nullptr;
    sum["sign_test"] = nullptr;
    if (by_level.size() >= 2) {
        std::size_t cap = SIZE_MAX;
        for (const auto& [level, rs] : by_level) cap = std::min(cap, rs.size());
        std::vector<std::pair<double, double>> pts;
        for (const auto& [level, rs] : by_level)
            for (std::size_t i = 0; i < cap; ++i) pts.emplace_back(level, rs[i]->performance_score);
        const RegressionFit f = ols_fit(pts);
        an.regression = f;
        sum["regression"] = {{"slope", f.slope},        {"intercept", f.intercept}, {"r_squared", f.r_squared},
                             {"n", f.n},                {"runs_per_level", cap},    {"fit_at_1", f.at(1.0)},
                             {"fit_at_10", f.at(10.0)}};
        agg["regression_slope"] = f.slope;
        agg["regression_fit_at_1"] = f.at(1.0);
        agg["regression_fit_at_10"] = f.at(10.0);

        const RegressionFit fm = ols_fit(means);
        sum["regression_on_means"] = {{"slope", fm.slope}, {"intercept", fm.intercept}, {"r_squared", fm.r_squared}};

        // Adjacent levels, paired by replicate order; ties are dropped.
        json pairs = json::array();
        double worst = 0.0;
        for (auto it = by_level.begin(); std::next(it) != by_level.end(); ++it) {
            const auto& lo = it->second;
            const auto& hi = std::next(it)->second;
            SignTestPair sp{it->first, std::next(it)->first};
            for (std::size_t i = 0; i < cap; ++i) {
                const double d = lo[i]->performance_score - hi[i]->performance_score;
                if (d == 0.0) continue;
                ++sp.trials;
                sp.successes += d > 0.0;
            }
            sp.p = sign_test_p(sp.successes, sp.trials);
            worst = std::max(worst, sp.p);
            pairs.push_back({{"from", sp.from}, {"to", sp.to}, {"successes", sp.successes}, {"trials", sp.trials}, {"p", sp.p}});
        }
        sum["sign_test"] = {{"pairs", pairs}, {"p_max", worst}};
        agg["monotone_sign_test_p"] = worst;
    }

    an.comparison = compare_to_reference(agg);
    std::size_t passed = 0;
    for (const auto& row : an.comparison) passed += row.pass;
    sum["comparison"] = {{"rows", an.comparison.size()}, {"passed", passed}};
    sum["aggregates"] = agg;
    return an;
}

inline std::string histogram_to_csv(const Analysis& an) {
    std::string out = "bin_lo,bin_hi";
    for (const auto& s : an.hist_systems) out += "," + s;
    out += "\n";
    const auto edges = histogram({}, kHistLo, kHistHi, kHistWidth).bin_edges;
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        out += format_number(edges[b]) + "," + format_number(edges[b + 1]);
        for (const auto& s : an.hist_systems) out += "," + std::to_string(an.histograms.at(s).counts[b]);
        out += "\n";
    }
    return out;
}

inline std::string regression_to_csv(const Analysis& an) {
    std::string out = "slope,intercept,r_squared,n\n";
    if (an.regression)
        out += format_number(an.regression->slope) + "," + format_number(an.regression->intercept) + "," +
               format_number(an.regression->r_squared) + "," + std::to_string(an.regression->n) + "\n";
    return out;
}

inline std::string comparison_to_csv(const std::vector<ComparisonRow>& rows) {
    std::string out = "criterion,metric,reference,measured,tolerance,status,reason\n";
    for (const auto& r : rows)
        out += r.criterion + "," + r.metric + "," + format_number(r.reference) + "," +
               (r.measured ? format_number(*r.measured) : std::string()) + "," + r.tolerance + "," +
               (r.pass ? "pass" : "fail") + "," + r.reason + "\n";
    return out;
}

inline void write_analysis(const Analysis& an, const std::filesystem::path& out_dir) {
    ensure_dir(out_dir);
    write_file(out_dir / "summary.json", an.summary.dump(2) + "\n");
    write_file(out_dir / "histogram.csv", histogram_to_csv(an));
    write_file(out_dir / "regression.csv", regression_to_csv(an));
    write_file(out_dir / "comparison.csv", comparison_to_csv(an.comparison));
}

inline Analysis cmd_analyze(const std::filesystem::path& runs_csv, const std::filesystem::path& out_dir) {
    const Analysis an = analyze_runs(runs_from_csv(read_file(runs_csv)));
    write_analysis(an, out_dir);
    return an;
}

// --- report -----------------------------------------------------------------------

inline const std::vector<std::string>& analysis_artifacts() {
    static const std::vector<std::string> names{"summary.json", "histogram.csv", "regression.csv", "comparison.csv"};
    return names;
}

namespace detail {

inline std::string num(const nlohmann::json& v) { return v.is_null() ? "n/a" : v.dump(); }

inline std::string row(const std::vector<std::string>& cells) {
    std::string out = "|";
    for (const auto& c : cells) out += " " + c + " |";
    return out + "\n";
}

inline std::string rule(std::size_t n) {
    std::string out = "|";
    for (std::size_t i = 0; i < n; ++i) out += "---|";
    return out + "\n";
}

struct CriterionLine {
    std::string id;
    std::string title;
};

}  // namespace detail

/// Criteria checked from the runs table (graded in comparison.csv).
inline const std::vector<detail::CriterionLine>& run_criteria() {
    static const std::vector<detail::CriterionLine> v{
        {"classifier_accuracy", "Classifier accuracy calibration"},
        {"failure_rates", "Failure-rate calibration"},
        {"fault_rate_modes", "Fault-rate modal bins"},
        {"severity_regression", "Severity regression and monotone degradation"},
    };
    return v;
}

/// Criteria that are properties of the code rather than of one runs table.
inline const std::vector<detail::CriterionLine>& property_criteria() {
    static const std::vector<detail::CriterionLine> v{
        {"q_learning_optimality", "Q-learning optimality on the 3x3 world"},
        {"q_update_contract", "Q-update unit contract"},
        {"ols_oracle", "OLS against a brute-force SSE minimizer"},
        {"determinism", "Byte-identical pipeline reruns"},
        {"conservation", "Inventory conservation"},
    };
    return v;
}

inline std::string render_report(const std::filesystem::path& in_dir) {
    using nlohmann::json;
    std::vector<std::string> missing;
    for (const auto& name : analysis_artifacts())
        if (!std::filesystem::is_regular_file(in_dir / name)) missing.push_back(name);
    if (!missing.empty()) {
        std::string msg = "missing analysis artifacts in " + in_dir.string() + ":";
        for (const auto& m : missing) msg += " " + m;
        throw IoError(msg);
    }

    json sum;
    try {
        sum = json::parse(read_file(in_dir / "summary.json"));
    } catch (const json::parse_error& e) {
        throw ValidationError("summary.json: " + std::string(e.what()));
    }
    const auto hist_lines = csv_lines(read_file(in_dir / "histogram.csv"));
    const auto reg_lines = csv_lines(read_file(in_dir / "regression.csv"));
    const auto cmp_lines = csv_lines(read_file(in_dir / "comparison.csv"));
    if (cmp_lines.empty() || cmp_lines[0] != "criterion,metric,reference,measured,tolerance,status,reason")
        throw ValidationError("comparison.csv: unexpected header");
    if (reg_lines.empty() || reg_lines[0] != "slope,intercept,r_squared,n")
        throw ValidationError("regression.csv: unexpected header");
    if (hist_lines.empty() || hist_lines[0].rfind("bin_lo,bin_hi", 0) != 0)
        throw ValidationError("histogram.csv: unexpected header");

    std::string md = "# Warehouse picking simulation report\n\n";
    const auto& runs = sum.at("runs");
    md += "Runs: " + runs.at("total").dump() + " total, " + runs.at("valid").dump() + " valid, " +
          runs.at("invalid").dump() + " without pick attempts.\n\n";

    md += "## Classifier accuracy\n\n";
    md += detail::row({"Classifier", "n", "Mean (%)", "SD (%)", "Min (%)", "Max (%)"}) + detail::rule(6);
    for (const auto& [name, s] : sum.at("accuracy_by_classifier").items())
        md += detail::row({name, s.at("n").dump(), detail::num(s.at("mean")), detail::num(s.at("sd")),
                           detail::num(s.at("min")), detail::num(s.at("max"))});

    md += "\n## Failure rates\n\n";
    md += detail::row({"System", "n", "Mean failure rate (%)", "SD (%)", "Min (%)", "Max (%)"}) + detail::rule(6);
    for (const auto& [name, s] : sum.at("failure_rate_by_system").items())
        md += detail::row({name, s.at("n").dump(), detail::num(s.at("mean")), detail::num(s.at("sd")),
                           detail::num(s.at("min")), detail::num(s.at("max"))});
    if (sum.contains("failure_disjoint_fraction"))
        md += "\nFraction of (proposed, industry) run pairs with proposed below industry: " +
              detail::num(sum["failure_disjoint_fraction"]) + "\n";

    md += "\n## Performance under environmental severity\n\n";
    md += detail::row({"Severity", "n", "Mean score", "SD"}) + detail::rule(4);
    for (const auto& s : sum.at("performance_by_severity"))
        md += detail::row({s.at("severity").dump(), s.at("n").dump(), detail::num(s.at("mean")), detail::num(s.at("sd"))});

    md += "\n## Fault-rate distribution\n\n";
    {
        const auto header = split_csv_line(hist_lines[0]);
        std::vector<std::string> cols{"Fault rate (%)"};
        for (std::size_t i = 2; i < header.size(); ++i) cols.push_back(header[i]);
        md += detail::row(cols) + detail::rule(cols.size());
        for (std::size_t i = 1; i < hist_lines.size(); ++i) {
            auto f = split_csv_line(hist_lines[i]);
            if (f.size() != header.size()) throw ValidationError("histogram.csv line " + std::to_string(i + 1) + ": malformed row");
            std::vector<std::string> cells{f[0] + "-" + f[1]};
            cells.insert(cells.end(), f.begin() + 2, f.end());
            md += detail::row(cells);
        }
    }

    md += "\n## Regression of performance on severity\n\n";
    if (reg_lines.size() >= 2) {
        const auto& r = sum.at("regression");
        md += detail::row({"Slope", "Intercept", "R^2", "n", "Fit at 1", "Fit at 10"}) + detail::rule(6);
        md += detail::row({detail::num(r.at("slope")), detail::num(r.at("intercept")), detail::num(r.at("r_squared")),
                           r.at("n").dump(), detail::num(r.at("fit_at_1")), detail::num(r.at("fit_at_10"))});
        if (!sum.at("sign_test").is_null())
            md += "\nLargest adjacent-level sign test p-value: " + detail::num(sum["sign_test"].at("p_max")) + "\n";
    } else {
        md += "Not enough severity levels for a fit.\n";
    }

    md += "\n## Acceptance criteria\n\n";
    std::map<std::string, std::pair<bool, std::vector<std::string>>> groups;
    for (std::size_t i = 1; i < cmp_lines.size(); ++i) {
        auto f = split_csv_line(cmp_lines[i]);
        if (f.size() != 7) throw ValidationError("comparison.csv line " + std::to_string(i + 1) + ": malformed row");
        auto& g = groups.try_emplace(f[0], true, std::vector<std::string>{}).first->second;
        g.first = g.first && f[5] == "pass";
        g.second.push_back(f[1] + " = " + (f[3].empty() ? "absent" : f[3]) + " (" + f[4] + " of " + f[2] + ")");
    }
    md += detail::row({"Criterion", "Status", "Detail"}) + detail::rule(3);
    for (const auto& c : run_criteria()) {
        auto it = groups.find(c.id);
        if (it == groups.end()) {
            md += detail::row({c.title, "FAIL", "no rows in comparison.csv"});
            continue;
        }
        std::string detail_text;
        for (const auto& d : it->second.second) detail_text += (detail_text.empty() ? "" : "; ") + d;
        md += detail::row({c.title, it->second.first ? "PASS" : "FAIL", detail_text});
    }
    for (const auto& c : property_criteria())
        md += detail::row({c.title, "see tests", "checked by the acceptance test binary"});
    return md;
}

inline void cmd_report(const std::filesystem::path& in_dir, const std::filesystem::path& out_file) {
    const std::string md = render_report(in_dir);
    if (out_file.has_parent_path()) ensure_dir(out_file.parent_path());
    write_file(out_file, md);
}

}  // namespace wps

#pragma once

// File formats: Q-table checkpoints (JSON), Q-surface slices, learning curves
// and run tables (CSV). All CSVs use ',' and '\n'; numbers are written in the
// shortest form that parses back to the same double.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "wps/metrics.hpp"
#include "wps/qlearning.hpp"

namespace wps {

/// Validation failure in user input (config, CSV content, checkpoint layout).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem failure (missing file, unwritable directory).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

inline void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

// --- CSV ----------------------------------------------------------------------

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

/// Lines of a CSV document; a trailing '\r' is tolerated on input.
inline std::vector<std::string> csv_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
    if (s.empty()) return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

// --- Q-table checkpoint ---------------------------------------------------------

inline nlohmann::json qtable_to_json(const QTable& q) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [s, row] : q.sorted_rows()) {
        for (auto a : kActions) {
            arr.push_back({{"state",
                            {{"x", s.robot_pos.x},
                             {"y", s.robot_pos.y},
                             {"carrying", s.carrying},
                             {"tx", s.target_shelf.x},
                             {"ty", s.target_shelf.y}}},
                           {"action", std::string(to_string(a))},
                           {"value", row[index_of(a)]}});
        }
    }
    return arr;
}

inline QTable qtable_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ValidationError("qtable: expected a JSON array of records");
    QTable q;
    std::size_t i = 0;
    for (const auto& rec : j) {
        const std::string where = "qtable[" + std::to_string(i++) + "]";
        try {
            const auto& st = rec.at("state");
            StateId s{{st.at("x").get<int>(), st.at("y").get<int>()},
                      st.at("carrying").get<bool>(),
                      {st.at("tx").get<int>(), st.at("ty").get<int>()}};
            auto action = parse_action(rec.at("action").get<std::string>());
            if (!action) throw ValidationError(where + ".action: unknown action");
            q.set(s, *action, rec.at("value").get<double>());
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(where + ": " + e.what());
        } catch (const std::invalid_argument& e) {
            throw ValidationError(where + ": " + e.what());
        }
    }
    return q;
}

inline std::string qtable_to_text(const QTable& q) { return qtable_to_json(q).dump(1) + "\n"; }

// --- Q-surface ----------------------------------------------------------------------

inline std::string surface_to_csv(const std::vector<SurfacePoint>& pts) {
    std::string out = "x,y,q\n";
    for (const auto& p : pts) out += std::to_string(p.x) + "," + std::to_string(p.y) + "," + format_number(p.q) + "\n";
    return out;
}

inline std::vector<SurfacePoint> surface_from_csv(std::string_view text) {
    auto lines = csv_lines(text);
    if (lines.empty() || lines[0] != "x,y,q") throw ValidationError("surface csv: expected header x,y,q");
    std::vector<SurfacePoint> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto f = split_csv_line(lines[i]);
        SurfacePoint p;
        if (f.size() != 3 || !parse_number(f[0], p.x) || !parse_number(f[1], p.y) || !parse_number(f[2], p.q))
            throw ValidationError("surface csv line " + std::to_string(i + 1) + ": malformed row");
        out.push_back(p);
    }
    return out;
}

// --- learning curve -----------------------------------------------------------------

inline std::string learning_curve_to_csv(const LearningCurve& c) {
    std::string out = "episode,return,steps\n";
    for (std::size_t i = 0; i < c.per_episode_return.size(); ++i)
        out += std::to_string(i) + "," + format_number(c.per_episode_return[i]) + "," +
               std::to_string(c.per_episode_steps[i]) + "\n";
    return out;
}

inline LearningCurve learning_curve_from_csv(std::string_view text) {
    auto lines = csv_lines(text);
    if (lines.empty() || lines[0] != "episode,return,steps")
        throw ValidationError("learning curve csv: expected header episode,return,steps");
    LearningCurve c;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto f = split_csv_line(lines[i]);
        long episode = 0;
        double ret = 0;
        int steps = 0;
        if (f.size() != 3 || !parse_number(f[0], episode) || !parse_number(f[1], ret) || !parse_number(f[2], steps))
            throw ValidationError("learning curve csv line " + std::to_string(i + 1) + ": malformed row");
        c.per_episode_return.push_back(ret);
        c.per_episode_steps.push_back(steps);
    }
    return c;
}

// --- runs table --------------------------------------------------------------------

inline constexpr std::string_view kRunsHeader =
    "run_id,system,classifier,severity,seed,accuracy_pct,failure_rate_pct,performance_score,steps,orders_completed";

/// Invalid runs (no pick attempts) leave the three metric fields empty.
inline std::string runs_to_csv(const std::vector<RunRecord>& runs) {
    std::string out(kRunsHeader);
    out += "\n";
    for (const auto& r : runs) {
        auto metric = [&](double v) { return r.valid ? format_number(v) : std::string(); };
        out += std::to_string(r.run_id) + "," + r.system + "," + r.classifier + "," + std::to_string(r.severity) + "," +
               std::to_string(r.seed) + "," + metric(r.accuracy_pct) + "," + metric(r.failure_rate_pct) + "," +
               metric(r.performance_score) + "," + std::to_string(r.steps) + "," + std::to_string(r.orders_completed) +
               "\n";
    }
    return out;
}

inline std::vector<RunRecord> runs_from_csv(std::string_view text) {
    auto lines = csv_lines(text);
    if (lines.empty() || lines[0] != kRunsHeader)
        throw ValidationError("runs csv line 1: expected header " + std::string(kRunsHeader));
    std::vector<RunRecord> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string where = "runs csv line " + std::to_string(i + 1);
        auto f = split_csv_line(lines[i]);
        if (f.size() != 10) throw ValidationError(where + ": expected 10 fields, got " + std::to_string(f.size()));
        RunRecord r;
        r.system = f[1];
        r.classifier = f[2];
        auto need = [&](bool ok, const char* field) {
            if (!ok) throw ValidationError(where + ": invalid " + field);
        };
        need(parse_number(f[0], r.run_id), "run_id");
        need(!r.system.empty(), "system");
        need(!r.classifier.empty(), "classifier");
        need(parse_number(f[3], r.severity) && r.severity >= 1 && r.severity <= 10, "severity");
        need(parse_number(f[4], r.seed), "seed");
        need(parse_number(f[8], r.steps), "steps");
        need(parse_number(f[9], r.orders_completed), "orders_completed");
        if (f[5].empty() && f[6].empty() && f[7].empty()) {
            r.valid = false;
        } else {
            need(parse_number(f[5], r.accuracy_pct) && r.accuracy_pct >= 0 && r.accuracy_pct <= 100, "accuracy_pct");
            need(parse_number(f[6], r.failure_rate_pct) && r.failure_rate_pct >= 0 && r.failure_rate_pct <= 100,
                 "failure_rate_pct");
            need(parse_number(f[7], r.performance_score), "performance_score");
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace wps

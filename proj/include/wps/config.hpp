#pragma once

// Experiment configuration: one JSON document describing the warehouse, the
// learner, the simulated systems and the grid of conditions to run.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"
#include "wps/perception.hpp"
#include "wps/qlearning.hpp"
#include "wps/serialize.hpp"
#include "wps/sim.hpp"

namespace wps {

struct SystemSpec {
    std::string label;
    FaultModel fault;
};

/// One block of the condition grid: classifiers x systems x severities x replicates.
struct Study {
    std::string name;
    std::vector<ClassifierSpec> classifiers;
    std::vector<std::string> systems;
    std::vector<int> severity_sweep;
    int replicates = 1;
};

struct SurfaceSlice {
    bool carrying = false;
    std::optional<GridPos> target;  // defaults to the first stocked shelf
};

struct ExperimentConfig {
    WarehouseSpec warehouse;
    QParams qlearning;
    int orders_per_episode = 3;
    double order_arrival_rate = 25.0;
    std::int64_t max_steps = 1000;
    SeverityCoefficients severity_coefficients;
    SurfaceSlice surface;
    std::vector<SystemSpec> systems;
    std::vector<Study> studies;
    std::uint64_t base_seed = 0;
    std::string output_dir;

    const SystemSpec& system(const std::string& label) const {
        for (const auto& s : systems)
            if (s.label == label) return s;
        throw ValidationError("unknown system label '" + label + "'");
    }

    std::size_t total_runs() const {
        std::size_t n = 0;
        for (const auto& st : studies)
            n += st.classifiers.size() * st.systems.size() * st.severity_sweep.size() * static_cast<std::size_t>(st.replicates);
        return n;
    }
};

namespace detail {

using nlohmann::json;

struct Reader {
    [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
        throw ValidationError("config field '" + path + "': " + msg);
    }

    static const json& require(const json& obj, const std::string& key, const std::string& path) {
        if (!obj.is_object()) fail(path, "expected an object");
        auto it = obj.find(key);
        if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing");
        return *it;
    }

    template <class T>
    static T number(const json& v, const std::string& path) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) fail(path, "expected a boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) fail(path, "expected an integer");
        } else {
            if (!v.is_number()) fail(path, "expected a number");
        }
        return v.get<T>();
    }

    template <class T>
    static T get(const json& obj, const std::string& key, const std::string& path) {
        return number<T>(require(obj, key, path), join(path, key));
    }

    template <class T>
    static T get_or(const json& obj, const std::string& key, const std::string& path, T fallback) {
        if (!obj.is_object() || !obj.contains(key)) return fallback;
        return number<T>(obj.at(key), join(path, key));
    }

    static std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

    static GridPos pos(const json& v, const std::string& path) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
            fail(path, "expected [x, y] integer pair");
        return {v[0].get<int>(), v[1].get<int>()};
    }
};

inline ClassifierSpec parse_classifier(const json& v, const std::string& path) {
    if (v.is_string()) {
        try {
            return builtin_spec(v.get<std::string>());
        } catch (const std::invalid_argument& e) {
            Reader::fail(path, e.what());
        }
    }
    if (!v.is_object()) Reader::fail(path, "expected a classifier name or an object");
    ClassifierSpec s;
    if (v.contains("name") && v.at("name").is_string()) {
        // Named override: start from the built-in row when one exists.
        try {
            s = builtin_spec(v.at("name").get<std::string>());
        } catch (const std::invalid_argument&) {
            s.name = v.at("name").get<std::string>();
        }
    } else {
        Reader::fail(Reader::join(path, "name"), "missing");
    }
    s.mean_acc = Reader::get_or<double>(v, "mean_acc", path, s.mean_acc);
    s.sd_acc = Reader::get_or<double>(v, "sd_acc", path, s.sd_acc);
    s.min_acc = Reader::get_or<double>(v, "min_acc", path, s.min_acc);
    s.max_acc = Reader::get_or<double>(v, "max_acc", path, s.max_acc);
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        Reader::fail(path, e.what());
    }
    return s;
}

inline std::vector<ClassifierSpec> parse_classifiers(const json& v, const std::string& path) {
    std::vector<ClassifierSpec> out;
    if (v.is_array()) {
        if (v.empty()) Reader::fail(path, "must not be empty");
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(parse_classifier(v[i], path + "[" + std::to_string(i) + "]"));
    } else {
        out.push_back(parse_classifier(v, path));
    }
    std::set<std::string> names;
    for (const auto& c : out)
        if (!names.insert(c.name).second) Reader::fail(path, "duplicate classifier '" + c.name + "'");
    return out;
}

inline std::vector<int> parse_levels(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) Reader::fail(path, "expected a non-empty array of levels");
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        int level = Reader::number<int>(v[i], p);
        if (level < 1 || level > 10) Reader::fail(p, "severity level must be in [1,10]");
        out.push_back(level);
    }
    return out;
}

inline WarehouseSpec parse_warehouse(const json& v, const std::string& path) {
    WarehouseSpec w;
    w.width = Reader::get<int>(v, "width", path);
    w.height = Reader::get<int>(v, "height", path);
    w.dropoff = Reader::pos(Reader::require(v, "dropoff", path), path + ".dropoff");
    const auto& shelves = Reader::require(v, "shelves", path);
    if (!shelves.is_array()) Reader::fail(path + ".shelves", "expected an array");
    for (std::size_t i = 0; i < shelves.size(); ++i)
        w.shelves.push_back(Reader::pos(shelves[i], path + ".shelves[" + std::to_string(i) + "]"));
    const auto& stock = Reader::require(v, "stock", path);
    if (!stock.is_object()) Reader::fail(path + ".stock", "expected an object keyed by SKU");
    for (const auto& [sku, entry] : stock.items()) {
        const std::string p = path + ".stock." + sku;
        if (sku.empty() || sku.find(',') != std::string::npos) Reader::fail(p, "SKU must be non-empty and comma-free");
        w.stock[sku] = StockEntry{Reader::pos(Reader::require(entry, "shelf", p), p + ".shelf"), Reader::get<int>(entry, "qty", p)};
    }
    if (v.contains("orders")) {
        const auto& orders = v.at("orders");
        if (!orders.is_array()) Reader::fail(path + ".orders", "expected an array");
        for (std::size_t i = 0; i < orders.size(); ++i) {
            const std::string p = path + ".orders[" + std::to_string(i) + "]";
            Order o;
            o.id = Reader::get_or<int>(orders[i], "id", p, static_cast<int>(i));
            o.arrival_tick = 0;
            const auto& lines = Reader::require(orders[i], "lines", p);
            if (!lines.is_array() || lines.empty()) Reader::fail(p + ".lines", "expected a non-empty array");
            for (std::size_t k = 0; k < lines.size(); ++k) {
                const std::string lp = p + ".lines[" + std::to_string(k) + "]";
                const auto& sku = Reader::require(lines[k], "sku", lp);
                if (!sku.is_string()) Reader::fail(lp + ".sku", "expected a string");
                int qty = Reader::get<int>(lines[k], "qty", lp);
                if (qty < 1) Reader::fail(lp + ".qty", "must be >= 1");
                o.lines.push_back({sku.get<std::string>(), qty});
            }
            w.orders.push_back(std::move(o));
        }
    }
    try {
        w.build();
    } catch (const std::invalid_argument& e) {
        Reader::fail(path, e.what());
    }
    return w;
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    using detail::Reader;
    if (!j.is_object()) throw ValidationError("config: expected a JSON object");
    ExperimentConfig c;
    c.warehouse = detail::parse_warehouse(Reader::require(j, "warehouse", ""), "warehouse");

    const auto& ql = Reader::require(j, "qlearning", "");
    QParams& q = c.qlearning;
    q.alpha = Reader::get<double>(ql, "alpha", "qlearning");
    q.gamma = Reader::get<double>(ql, "gamma", "qlearning");
    q.epsilon_start = Reader::get<double>(ql, "epsilon_start", "qlearning");
    q.epsilon_end = Reader::get<double>(ql, "epsilon_end", "qlearning");
    q.epsilon_decay_episodes = Reader::get<int>(ql, "epsilon_decay_episodes", "qlearning");
    q.episodes = Reader::get<int>(ql, "episodes", "qlearning");
    q.max_steps_per_episode = Reader::get<int>(ql, "max_steps_per_episode", "qlearning");
    if (!(q.alpha > 0 && q.alpha <= 1)) Reader::fail("qlearning.alpha", "must be in (0,1]");
    if (!(q.gamma >= 0 && q.gamma < 1)) Reader::fail("qlearning.gamma", "must be in [0,1)");
    if (!(q.epsilon_start >= 0 && q.epsilon_start <= 1)) Reader::fail("qlearning.epsilon_start", "must be in [0,1]");
    if (!(q.epsilon_end >= 0 && q.epsilon_end <= q.epsilon_start))
        Reader::fail("qlearning.epsilon_end", "must be in [0, epsilon_start]");
    if (q.epsilon_decay_episodes < 1) Reader::fail("qlearning.epsilon_decay_episodes", "must be positive");
    if (q.episodes < 1) Reader::fail("qlearning.episodes", "must be positive");
    if (q.max_steps_per_episode < 1) Reader::fail("qlearning.max_steps_per_episode", "must be positive");

    if (j.contains("training")) {
        c.orders_per_episode = Reader::get_or<int>(j.at("training"), "orders_per_episode", "training", c.orders_per_episode);
        if (c.orders_per_episode < 1) Reader::fail("training.orders_per_episode", "must be positive");
    }

    const auto& sim = Reader::require(j, "simulation", "");
    c.order_arrival_rate = Reader::get<double>(sim, "order_arrival_rate", "simulation");
    if (c.order_arrival_rate < 0) Reader::fail("simulation.order_arrival_rate", "must be non-negative");
    c.max_steps = Reader::get<std::int64_t>(sim, "max_steps", "simulation");
    if (c.max_steps < 1) Reader::fail("simulation.max_steps", "must be >= 1");
    if (sim.contains("severity_coefficients")) {
        const auto& sc = sim.at("severity_coefficients");
        const std::string p = "simulation.severity_coefficients";
        c.severity_coefficients.slip_per_level = Reader::get_or<double>(sc, "slip_per_level", p, c.severity_coefficients.slip_per_level);
        c.severity_coefficients.degradation_per_level =
            Reader::get_or<double>(sc, "degradation_per_level", p, c.severity_coefficients.degradation_per_level);
        try {
            c.severity_coefficients.validate();
        } catch (const std::invalid_argument& e) {
            Reader::fail(p, e.what());
        }
    }

    if (j.contains("surface")) {
        const auto& sf = j.at("surface");
        c.surface.carrying = Reader::get_or<bool>(sf, "carrying", "surface", false);
        if (sf.contains("target")) c.surface.target = Reader::pos(sf.at("target"), "surface.target");
    }

    const auto& systems = Reader::require(j, "systems", "");
    if (!systems.is_array() || systems.empty()) Reader::fail("systems", "expected a non-empty array");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < systems.size(); ++i) {
        const std::string p = "systems[" + std::to_string(i) + "]";
        const auto& lab = Reader::require(systems[i], "label", p);
        if (!lab.is_string() || lab.get<std::string>().empty()) Reader::fail(p + ".label", "expected a non-empty string");
        SystemSpec s{lab.get<std::string>(),
                     {Reader::get<double>(systems[i], "per_pick_fault_prob", p), Reader::get<double>(systems[i], "run_noise_sd", p)}};
        if (s.label.find(',') != std::string::npos) Reader::fail(p + ".label", "must not contain ','");
        if (!labels.insert(s.label).second) Reader::fail(p + ".label", "duplicate label '" + s.label + "'");
        try {
            s.fault.validate();
        } catch (const std::invalid_argument& e) {
            Reader::fail(p, e.what());
        }
        c.systems.push_back(s);
    }

    c.base_seed = Reader::get<std::uint64_t>(j, "base_seed", "");
    if (j.contains("output_dir")) {
        if (!j.at("output_dir").is_string()) Reader::fail("output_dir", "expected a string");
        c.output_dir = j.at("output_dir").get<std::string>();
    }

    // In the single-study form the top-level "systems" holds definitions, so
    // the study always runs every system.
    auto parse_study = [&](const nlohmann::json& v, const std::string& p, std::string name) {
        const bool top_level = p.empty();
        Study st;
        st.name = v.contains("name") && v.at("name").is_string() ? v.at("name").get<std::string>() : std::move(name);
        const char* ckey = v.contains("classifiers") ? "classifiers" : "classifier";
        st.classifiers = detail::parse_classifiers(Reader::require(v, ckey, p), Reader::join(p, ckey));
        if (!top_level && v.contains("systems")) {
            const auto& sl = v.at("systems");
            if (!sl.is_array() || sl.empty()) Reader::fail(Reader::join(p, "systems"), "expected a non-empty array of labels");
            for (const auto& l : sl) {
                if (!l.is_string() || !labels.count(l.get<std::string>()))
                    Reader::fail(Reader::join(p, "systems"), "unknown system label " + l.dump());
                st.systems.push_back(l.get<std::string>());
            }
        } else {
            for (const auto& s : c.systems) st.systems.push_back(s.label);
        }
        st.severity_sweep = detail::parse_levels(Reader::require(v, "severity_sweep", p), Reader::join(p, "severity_sweep"));
        st.replicates = Reader::get<int>(v, "replicates", p);
        if (st.replicates < 1) Reader::fail(Reader::join(p, "replicates"), "must be >= 1");
        return st;
    };

    if (j.contains("studies")) {
        const auto& studies = j.at("studies");
        if (!studies.is_array() || studies.empty()) Reader::fail("studies", "expected a non-empty array");
        for (std::size_t i = 0; i < studies.size(); ++i)
            c.studies.push_back(parse_study(studies[i], "studies[" + std::to_string(i) + "]", "study" + std::to_string(i)));
    } else {
        c.studies.push_back(parse_study(j, "", "main"));
    }
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + ": invalid JSON: " + e.what());
    }
    return parse_config(j);
}

}  // namespace wps

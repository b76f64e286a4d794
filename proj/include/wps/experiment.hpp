#pragma once

// Training and replicated-simulation orchestration behind `wps train` and
// `wps simulate`.

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>
#include <vector>

#include "wps/config.hpp"
#include "wps/qlearning.hpp"
#include "wps/serialize.hpp"
#include "wps/sim.hpp"

namespace wps {

struct PlannedRun {
    std::int64_t run_id = 0;
    ClassifierSpec classifier;
    std::string system;
    int severity = 1;
    std::uint64_t seed = 0;
};

/// Expands the studies into runs. Order: study, classifier, system, severity,
/// replicate. Run i gets seed base_seed + i.
inline std::vector<PlannedRun> plan_runs(const ExperimentConfig& cfg) {
    std::vector<PlannedRun> out;
    out.reserve(cfg.total_runs());
    std::int64_t id = 0;
    for (const auto& st : cfg.studies)
        for (const auto& cls : st.classifiers)
            for (const auto& sys : st.systems)
                for (int level : st.severity_sweep)
                    for (int rep = 0; rep < st.replicates; ++rep, ++id)
                        out.push_back({id, cls, sys, level, cfg.base_seed + static_cast<std::uint64_t>(id)});
    return out;
}

inline SimConfig sim_config_for(const ExperimentConfig& cfg, const PlannedRun& run) {
    SimConfig s;
    s.warehouse = cfg.warehouse;
    s.order_arrival_rate = cfg.order_arrival_rate;
    s.classifier = run.classifier;
    s.severity = run.severity;
    s.severity_coefficients = cfg.severity_coefficients;
    s.fault = cfg.system(run.system).fault;
    s.seed = run.seed;
    s.max_steps = cfg.max_steps;
    return s;
}

inline std::pair<QTable, LearningCurve> train_policy(const ExperimentConfig& cfg) {
    TrainingEnv env(cfg.warehouse, cfg.orders_per_episode, cfg.base_seed);
    // The environment draws its orders from (base_seed, Training); exploration
    // gets its own seed so the two sequences never overlap.
    Rng rng = make_rng(cfg.base_seed + 1, Stream::Training);
    return train(env, cfg.qlearning, rng);
}

inline GridPos surface_target(const ExperimentConfig& cfg) {
    if (cfg.surface.target) return *cfg.surface.target;
    if (!cfg.warehouse.stock.empty()) return cfg.warehouse.stock.begin()->second.shelf;
    return kNoTarget;
}

/// A checkpoint matches a layout when every state sits on a walkable cell and
/// targets a shelf of that layout (or the sentinel).
inline void check_layout(const QTable& q, const ExperimentConfig& cfg) {
    const WarehouseState layout = cfg.warehouse.build();
    for (const auto& [s, row] : q.sorted_rows()) {
        const auto where = "state (" + std::to_string(s.robot_pos.x) + "," + std::to_string(s.robot_pos.y) + ")";
        if (!layout.in_bounds(s.robot_pos) || layout.at(s.robot_pos).kind == CellKind::Shelf)
            throw ValidationError("layout mismatch: checkpoint " + where + " is not a walkable cell of the configured warehouse");
        if (s.target_shelf != kNoTarget &&
            (!layout.in_bounds(s.target_shelf) || layout.at(s.target_shelf).kind != CellKind::Shelf))
            throw ValidationError("layout mismatch: checkpoint " + where + " targets a cell that is not a shelf");
    }
}

/// Runs every planned condition on `jobs` worker threads. Results are indexed
/// by run_id, so the output does not depend on scheduling.
inline std::vector<RunRecord> simulate_runs(const ExperimentConfig& cfg, const QTable& q, unsigned jobs = 1) {
    const auto plan = plan_runs(cfg);
    std::vector<RunRecord> results(plan.size());
    const GreedyPolicy policy{&q};
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= plan.size()) return;
            try {
                RunRecord rec = measure_run(sim_config_for(cfg, plan[i]), policy);
                rec.run_id = plan[i].run_id;
                rec.system = plan[i].system;
                results[i] = std::move(rec);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(plan.size());
            }
        }
    };
    jobs = std::max(1u, jobs);
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
        worker();
    }
    if (error) std::rethrow_exception(error);
    return results;
}

struct TrainOutputs {
    std::filesystem::path qtable;
    std::filesystem::path learning_curve;
    std::vector<std::filesystem::path> surfaces;
};

inline TrainOutputs cmd_train(const std::filesystem::path& config_path, const std::filesystem::path& out_dir) {
    const ExperimentConfig cfg = load_config(config_path);
    ensure_dir(out_dir);
    auto [q, curve] = train_policy(cfg);

    TrainOutputs out{out_dir / "qtable.json", out_dir / "learning_curve.csv", {}};
    write_file(out.qtable, qtable_to_text(q));
    write_file(out.learning_curve, learning_curve_to_csv(curve));
    const WarehouseState layout = cfg.warehouse.build();
    for (auto a : kActions) {
        auto path = out_dir / ("qsurface_" + std::string(to_string(a)) + ".csv");
        write_file(path, surface_to_csv(export_q_surface(q, layout, cfg.surface.carrying, surface_target(cfg), a)));
        out.surfaces.push_back(path);
    }
    return out;
}

inline QTable load_qtable(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return qtable_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + ": invalid JSON: " + e.what());
    }
}

inline std::filesystem::path cmd_simulate(const std::filesystem::path& config_path, const std::filesystem::path& qtable_path,
                                          const std::filesystem::path& out_dir, unsigned jobs = 1) {
    const ExperimentConfig cfg = load_config(config_path);
    const QTable q = load_qtable(qtable_path);
    check_layout(q, cfg);
    ensure_dir(out_dir);
    const auto runs = simulate_runs(cfg, q, jobs);
    auto path = out_dir / "runs.csv";
    write_file(path, runs_to_csv(runs));
    return path;
}

}  // namespace wps

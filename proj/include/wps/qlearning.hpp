#pragma once

// Tabular Q-learning over the warehouse StateId space.
//
//   Q(s,a) <- Q(s,a) + alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))
//
// with the bootstrap term dropped on terminal transitions.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wps/rng.hpp"
#include "wps/warehouse.hpp"

namespace wps {

struct QParams {
    double alpha = 0.1;
    double gamma = 0.95;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    int epsilon_decay_episodes = 300;
    int episodes = 500;
    int max_steps_per_episode = 200;

    void validate() const {
        if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0,1]");
        if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in [0,1)");
        if (!(epsilon_end >= 0.0 && epsilon_end <= epsilon_start && epsilon_start <= 1.0))
            throw std::invalid_argument("epsilon must satisfy 0 <= epsilon_end <= epsilon_start <= 1");
        if (epsilon_decay_episodes < 1) throw std::invalid_argument("epsilon_decay_episodes must be positive");
        if (episodes < 1) throw std::invalid_argument("episodes must be positive");
        if (max_steps_per_episode < 0) throw std::invalid_argument("max_steps_per_episode must be non-negative");
    }
};

/// Reward per step outcome. The dense step cost makes shortest paths optimal;
/// one delivery outweighs a twenty-step walk.
struct RewardScheme {
    double delivered = 10.0;
    double picked = 2.0;
    double failure = -5.0;
    double step = -0.1;

    double operator()(StepOutcome o) const {
        switch (o) {
            case StepOutcome::Delivered: return delivered;
            case StepOutcome::Picked: return picked;
            case StepOutcome::PickFailed:
            case StepOutcome::DeliverFailed: return failure;
            default: return step;
        }
    }
};

using QRow = std::array<double, kNumActions>;

class QTable {
public:
    /// Unseen pairs read as exactly 0.0.
    double value(const StateId& s, Action a) const {
        auto it = rows_.find(s);
        return it == rows_.end() ? 0.0 : it->second[index_of(a)];
    }

    QRow row(const StateId& s) const {
        auto it = rows_.find(s);
        return it == rows_.end() ? QRow{} : it->second;
    }

    const QRow* find(const StateId& s) const {
        auto it = rows_.find(s);
        return it == rows_.end() ? nullptr : &it->second;
    }

    void set(const StateId& s, Action a, double v) {
        if (!std::isfinite(v)) throw std::invalid_argument("Q-values must be finite");
        auto [it, inserted] = rows_.try_emplace(s, QRow{});
        it->second[index_of(a)] = v;
    }

    double max_value(const StateId& s) const {
        auto it = rows_.find(s);
        if (it == rows_.end()) return 0.0;
        return *std::max_element(it->second.begin(), it->second.end());
    }

    std::size_t rows() const { return rows_.size(); }

    /// Stored rows in ascending StateId order.
    std::vector<std::pair<StateId, QRow>> sorted_rows() const {
        std::vector<std::pair<StateId, QRow>> out(rows_.begin(), rows_.end());
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        return out;
    }

    bool operator==(const QTable& other) const { return rows_ == other.rows_; }

private:
    std::unordered_map<StateId, QRow, StateIdHash> rows_;
};

struct Transition {
    StateId s;
    Action a = Action::MoveN;
    double r = 0.0;
    StateId s_next;
    bool terminal = false;
};

struct LearningCurve {
    std::vector<double> per_episode_return;
    std::vector<int> per_episode_steps;
    bool operator==(const LearningCurve&) const = default;
};

inline double td_target(const QTable& q, const Transition& t, double gamma) {
    return t.r + (t.terminal ? 0.0 : gamma * q.max_value(t.s_next));
}

inline void q_update(QTable& q, const Transition& t, double alpha, double gamma) {
    if (!std::isfinite(t.r)) throw std::invalid_argument("reward must be finite");
    const double old = q.value(t.s, t.a);
    q.set(t.s, t.a, old + alpha * (td_target(q, t, gamma) - old));
}

/// Argmax with ties resolved by enum order (MoveN first).
inline Action greedy_action(const QTable& q, const StateId& s) {
    const QRow* row = q.find(s);
    if (row == nullptr) return Action::MoveN;
    std::size_t best = 0;
    for (std::size_t i = 1; i < kNumActions; ++i)
        if ((*row)[i] > (*row)[best]) best = i;
    return kActions[best];
}

inline Action select_action(const QTable& q, const StateId& s, double epsilon, Rng& rng) {
    if (uniform01(rng) < epsilon) {
        std::uniform_int_distribution<std::size_t> pick(0, kNumActions - 1);
        return kActions[pick(rng)];
    }
    return greedy_action(q, s);
}

/// Linear decay from epsilon_start to epsilon_end, then held.
inline double epsilon_at(const QParams& p, int episode) {
    if (episode >= p.epsilon_decay_episodes) return p.epsilon_end;
    double frac = static_cast<double>(episode) / static_cast<double>(p.epsilon_decay_episodes);
    return p.epsilon_start + (p.epsilon_end - p.epsilon_start) * frac;
}

template <class Env>
concept EpisodicEnv = requires(Env env, Action a) {
    { env.reset() } -> std::same_as<StateId>;
    { env.step(a) } -> std::same_as<Transition>;
};

template <EpisodicEnv Env>
std::pair<QTable, LearningCurve> train(Env& env, const QParams& params, Rng& rng) {
    params.validate();
    QTable q;
    LearningCurve curve;
    curve.per_episode_return.reserve(static_cast<std::size_t>(params.episodes));
    curve.per_episode_steps.reserve(static_cast<std::size_t>(params.episodes));
    for (int ep = 0; ep < params.episodes; ++ep) {
        const double eps = epsilon_at(params, ep);
        StateId s = env.reset();
        double ret = 0.0;
        int steps = 0;
        while (steps < params.max_steps_per_episode) {
            Transition t = env.step(select_action(q, s, eps, rng));
            q_update(q, t, params.alpha, params.gamma);
            ret += t.r;
            ++steps;
            s = t.s_next;
            if (t.terminal) break;
        }
        curve.per_episode_return.push_back(ret);
        curve.per_episode_steps.push_back(steps);
    }
    return {std::move(q), std::move(curve)};
}

/// Runs the greedy policy on a fixed order set with deterministic dynamics.
/// Returns the tick count at which every order was delivered, or nullopt.
inline std::optional<int> greedy_rollout(const QTable& q, WarehouseState state, int max_steps) {
    if (state.open_orders.empty()) return 0;
    for (int step = 1; step <= max_steps; ++step) {
        apply(state, greedy_action(q, state_id(state)));
        if (state.open_orders.empty()) return step;
    }
    return std::nullopt;
}

struct ModelEdge {
    double reward = 0.0;
    StateId next;
    bool terminal = false;
    bool operator==(const ModelEdge&) const = default;
};

/// Deterministic tabular model: every reachable (s,a) with its successor and reward.
struct TabularModel {
    std::map<StateId, std::array<ModelEdge, kNumActions>> edges;
    StateId initial;

    std::size_t num_pairs() const { return edges.size() * kNumActions; }
};

/// Enumerates the reachable state space of a fixed order set by breadth-first
/// search over full warehouse states. Throws if two full states that share a
/// StateId disagree on some successor, since the tabular model would then be
/// ill-defined.
inline TabularModel enumerate_model(const WarehouseState& initial, const RewardScheme& reward = {},
                                    std::size_t max_states = 1'000'000) {
    using Key = std::tuple<GridPos, std::optional<Sku>, int, std::size_t, std::vector<int>>;
    auto key_of = [](const WarehouseState& s) {
        std::vector<int> stock;
        for (const auto& c : s.grid)
            for (const auto& [sku, qty] : c.inventory) stock.push_back(qty);
        return Key{s.robot_pos, s.carrying, s.head_filled, s.open_orders.size(), std::move(stock)};
    };

    TabularModel model;
    model.initial = state_id(initial);
    std::map<Key, bool> seen;
    std::queue<WarehouseState> frontier;
    seen.emplace(key_of(initial), true);
    frontier.push(initial);
    while (!frontier.empty()) {
        WarehouseState s = std::move(frontier.front());
        frontier.pop();
        const StateId sid = state_id(s);
        std::array<ModelEdge, kNumActions> row{};
        for (auto a : kActions) {
            WarehouseState next = s;
            StepOutcome outcome = apply(next, a);
            ModelEdge e{reward(outcome), state_id(next), next.open_orders.empty()};
            row[index_of(a)] = e;
            if (!e.terminal && seen.emplace(key_of(next), true).second) {
                if (seen.size() > max_states) throw std::length_error("state space exceeds enumeration limit");
                frontier.push(std::move(next));
            }
        }
        auto [it, inserted] = model.edges.try_emplace(sid, row);
        if (!inserted && it->second != row)
            throw std::logic_error("StateId aliasing: distinct full states yield different transitions");
    }
    return model;
}

/// max over (s,a) of |Q(s,a) - (r + gamma * max_a' Q(s',a'))|.
inline double bellman_residual(const QTable& q, const TabularModel& model, double gamma) {
    double worst = 0.0;
    for (const auto& [s, row] : model.edges) {
        for (auto a : kActions) {
            const ModelEdge& e = row[index_of(a)];
            double target = e.reward + (e.terminal ? 0.0 : gamma * q.max_value(e.next));
            worst = std::max(worst, std::abs(q.value(s, a) - target));
        }
    }
    return worst;
}

struct SurfacePoint {
    int x = 0;
    int y = 0;
    double q = 0.0;
    bool operator==(const SurfacePoint&) const = default;
};

/// One Q-value per grid cell for a fixed (carrying, target, action) slice, row-major.
inline std::vector<SurfacePoint> export_q_surface(const QTable& q, const WarehouseState& layout, bool carrying,
                                                  GridPos target, Action action) {
    if (target != kNoTarget && (!layout.in_bounds(target) || layout.at(target).kind != CellKind::Shelf))
        throw std::invalid_argument("surface target must be a shelf or the no-target sentinel");
    std::vector<SurfacePoint> out;
    out.reserve(layout.grid.size());
    for (int y = 0; y < layout.height; ++y)
        for (int x = 0; x < layout.width; ++x) out.push_back({x, y, q.value(StateId{{x, y}, carrying, target}, action)});
    return out;
}

}  // namespace wps

#pragma once

// Shared fixtures and independent oracles for the test binaries.

#include <cmath>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "wps/qlearning.hpp"
#include "wps/sim.hpp"
#include "wps/warehouse.hpp"

namespace testing_support {

using namespace wps;

/// 3x3 world: dropoff (0,0), shelf (1,0) holding A x5, one order for one A.
inline WarehouseSpec tiny_world(int qty = 5) {
    WarehouseSpec w;
    w.width = 3;
    w.height = 3;
    w.dropoff = {0, 0};
    w.shelves = {{1, 0}};
    w.stock = {{"A", {{1, 0}, qty}}};
    w.orders = {Order{0, {{"A", 1}}, 0}};
    return w;
}

/// The default 5x5 layout used by the shipped config.
inline WarehouseSpec default_world(int qty = 1000) {
    WarehouseSpec w;
    w.width = 5;
    w.height = 5;
    w.dropoff = {0, 0};
    w.shelves = {{1, 1}, {3, 1}, {1, 3}, {3, 3}};
    w.stock = {{"A", {{1, 1}, qty}}, {"B", {{3, 1}, qty}}, {"C", {{1, 3}, qty}}, {"D", {{3, 3}, qty}}, {"E", {{3, 3}, qty}}};
    return w;
}

// Full-state key for search; the layout never changes, so only mutable parts matter.
inline auto search_key(const WarehouseState& s) {
    std::vector<int> stock;
    for (const auto& c : s.grid)
        for (const auto& [sku, q] : c.inventory) stock.push_back(q);
    return std::make_tuple(s.robot_pos.x, s.robot_pos.y, s.carrying.value_or(""), s.head_filled, s.open_orders.size(),
                           stock);
}

/// Fewest transitions that empty the order queue, by breadth-first search
/// over full states. nullopt when unreachable within `limit` states.
inline std::optional<int> bfs_min_steps(const WarehouseState& start, std::size_t limit = 200000) {
    if (start.open_orders.empty()) return 0;
    std::set<decltype(search_key(start))> seen{search_key(start)};
    std::deque<std::pair<WarehouseState, int>> q{{start, 0}};
    while (!q.empty()) {
        auto [s, d] = std::move(q.front());
        q.pop_front();
        for (auto a : kActions) {
            auto next = transition(s, a).state;
            if (next.open_orders.empty()) return d + 1;
            if (seen.insert(search_key(next)).second) {
                if (seen.size() > limit) return std::nullopt;
                q.emplace_back(std::move(next), d + 1);
            }
        }
    }
    return std::nullopt;
}

/// Optimal Q by value iteration over an enumerated deterministic model.
inline QTable value_iteration(const TabularModel& m, double gamma, double tol = 1e-12) {
    std::map<StateId, std::array<double, kNumActions>> q;
    for (const auto& [s, row] : m.edges) q[s].fill(0.0);
    auto vmax = [&](const StateId& s) {
        auto it = q.find(s);
        if (it == q.end()) return 0.0;
        double v = it->second[0];
        for (double x : it->second) v = std::max(v, x);
        return v;
    };
    for (int iter = 0; iter < 100000; ++iter) {
        double delta = 0.0;
        for (const auto& [s, row] : m.edges) {
            for (std::size_t i = 0; i < kNumActions; ++i) {
                const auto& e = row[i];
                double v = e.reward + (e.terminal ? 0.0 : gamma * vmax(e.next));
                delta = std::max(delta, std::abs(v - q[s][i]));
                q[s][i] = v;
            }
        }
        if (delta < tol) break;
    }
    QTable out;
    for (const auto& [s, row] : q)
        for (std::size_t i = 0; i < kNumActions; ++i) out.set(s, kActions[i], row[i]);
    return out;
}

/// Least-squares line by nested golden-section search on the SSE. Uses no
/// normal equations; the SSE is convex in both coefficients, so the profile
/// over the slope is convex as well.
inline std::pair<double, double> brute_force_line(const std::vector<std::pair<double, double>>& pts,
                                                  double bound = 100.0) {
    using LD = long double;
    auto sse = [&](LD b, LD a) {
        LD s = 0;
        for (auto [x, y] : pts) {
            LD e = static_cast<LD>(y) - (a + b * static_cast<LD>(x));
            s += e * e;
        }
        return s;
    };
    const LD phi = (std::sqrt(5.0L) - 1) / 2;
    auto golden = [&](auto f, LD lo, LD hi) {
        LD c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
        LD fc = f(c), fd = f(d);
        for (int i = 0; i < 200 && hi - lo > 1e-13L; ++i) {
            if (fc < fd) {
                hi = d;
                d = c;
                fd = fc;
                c = hi - phi * (hi - lo);
                fc = f(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + phi * (hi - lo);
                fd = f(d);
            }
        }
        return (lo + hi) / 2;
    };
    auto best_a = [&](LD b) { return golden([&](LD a) { return sse(b, a); }, -bound, bound); };
    const LD b = golden([&](LD b) { return sse(b, best_a(b)); }, -bound, bound);
    return {static_cast<double>(b), static_cast<double>(best_a(b))};
}

/// Mean of N(mu, sd) truncated to [lo, hi] by Simpson quadrature.
inline double truncated_mean_quadrature(double mu, double sd, double lo, double hi, int n = 20000) {
    auto pdf = [&](double x) { return std::exp(-0.5 * ((x - mu) / sd) * ((x - mu) / sd)); };
    const double h = (hi - lo) / n;
    double num = 0.0, den = 0.0;
    for (int i = 0; i <= n; ++i) {
        double x = lo + i * h;
        double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        num += w * x * pdf(x);
        den += w * pdf(x);
    }
    return num / den;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("wps_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing_support

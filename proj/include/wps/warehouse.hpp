#pragma once

// Warehouse world: grid, inventory, orders, one robot, and the deterministic
// state-transition kernel that every other layer builds on.

#include <array>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wps {

struct GridPos {
    int x = 0;
    int y = 0;
    auto operator<=>(const GridPos&) const = default;
};

/// Sentinel target used when no order is waiting.
inline constexpr GridPos kNoTarget{-1, -1};

inline int manhattan(GridPos a, GridPos b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

enum class CellKind : std::uint8_t { Aisle, Shelf, DropOff };

using Sku = std::string;

struct Cell {
    CellKind kind = CellKind::Aisle;
    std::map<Sku, int> inventory;  // only populated on shelves
    bool operator==(const Cell&) const = default;
};

struct OrderLine {
    Sku sku;
    int qty = 1;
    bool operator==(const OrderLine&) const = default;
};

struct Order {
    int id = 0;
    std::vector<OrderLine> lines;
    std::int64_t arrival_tick = 0;

    int total_units() const {
        int n = 0;
        for (const auto& l : lines) n += l.qty;
        return n;
    }
    bool operator==(const Order&) const = default;
};

inline void validate_order(const Order& o) {
    if (o.lines.empty()) throw std::invalid_argument("order " + std::to_string(o.id) + " has no lines");
    for (const auto& l : o.lines)
        if (l.qty < 1) throw std::invalid_argument("order " + std::to_string(o.id) + " has a line with qty < 1");
    if (o.arrival_tick < 0) throw std::invalid_argument("order " + std::to_string(o.id) + " has a negative arrival tick");
}

enum class Action : std::uint8_t { MoveN, MoveE, MoveS, MoveW, Pick, Deliver };

inline constexpr std::size_t kNumActions = 6;
inline constexpr std::array<Action, kNumActions> kActions{Action::MoveN, Action::MoveE, Action::MoveS,
                                                         Action::MoveW, Action::Pick,  Action::Deliver};

inline constexpr std::size_t index_of(Action a) { return static_cast<std::size_t>(a); }

inline constexpr bool is_move(Action a) { return index_of(a) < 4; }

inline constexpr std::string_view to_string(Action a) {
    constexpr std::array<std::string_view, kNumActions> names{"MoveN", "MoveE", "MoveS", "MoveW", "Pick", "Deliver"};
    return names[index_of(a)];
}

inline std::optional<Action> parse_action(std::string_view s) {
    for (auto a : kActions)
        if (to_string(a) == s) return a;
    return std::nullopt;
}

enum class StepOutcome : std::uint8_t { Moved, Blocked, Picked, PickFailed, Delivered, DeliverFailed };

inline constexpr std::string_view to_string(StepOutcome o) {
    constexpr std::array<std::string_view, 6> names{"Moved", "Blocked", "Picked", "PickFailed", "Delivered", "DeliverFailed"};
    return names[static_cast<std::size_t>(o)];
}

/// North decreases y (row 0 is the top row).
inline constexpr GridPos step_offset(Action a) {
    switch (a) {
        case Action::MoveN: return {0, -1};
        case Action::MoveE: return {1, 0};
        case Action::MoveS: return {0, 1};
        case Action::MoveW: return {-1, 0};
        default: return {0, 0};
    }
}

struct StockEntry {
    GridPos shelf;
    int qty = 0;
    bool operator==(const StockEntry&) const = default;
};

/// Full ground truth of one simulation. The layout part (size, cell kinds,
/// dropoff, SKU placement) never changes after construction.
struct WarehouseState {
    int width = 0;
    int height = 0;
    std::vector<Cell> grid;  // row-major, index = y * width + x
    GridPos dropoff;
    std::map<Sku, GridPos> sku_shelf;

    GridPos robot_pos;
    std::optional<Sku> carrying;
    std::deque<Order> open_orders;
    int head_filled = 0;  // units of the head order already delivered
    std::int64_t tick = 0;
    std::int64_t delivered = 0;
    std::int64_t orders_completed = 0;

    bool in_bounds(GridPos p) const { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }
    std::size_t index(GridPos p) const { return static_cast<std::size_t>(p.y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(p.x); }
    const Cell& at(GridPos p) const { return grid.at(index(p)); }
    Cell& at(GridPos p) { return grid.at(index(p)); }

    std::vector<GridPos> shelves() const {
        std::vector<GridPos> out;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                if (at({x, y}).kind == CellKind::Shelf) out.push_back({x, y});
        return out;
    }

    std::vector<Sku> catalog() const {
        std::vector<Sku> out;
        for (const auto& [sku, pos] : sku_shelf) out.push_back(sku);
        return out;
    }

    std::int64_t shelf_stock() const {
        std::int64_t n = 0;
        for (const auto& c : grid)
            for (const auto& [sku, qty] : c.inventory) n += qty;
        return n;
    }

    /// Conserved quantity: shelf stock + carried + delivered.
    std::int64_t total_items() const { return shelf_stock() + (carrying ? 1 : 0) + delivered; }

    bool operator==(const WarehouseState&) const = default;
};

inline WarehouseState build_warehouse(int width, int height, const std::vector<GridPos>& shelf_positions, GridPos dropoff,
                                      const std::map<Sku, StockEntry>& initial_stock) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("warehouse dimensions must be positive");
    WarehouseState s;
    s.width = width;
    s.height = height;
    s.grid.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), Cell{});

    auto where = [](GridPos p) { return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")"; };
    for (auto p : shelf_positions) {
        if (!s.in_bounds(p)) throw std::invalid_argument("shelf position " + where(p) + " is out of bounds");
        s.at(p).kind = CellKind::Shelf;
    }
    if (!s.in_bounds(dropoff)) throw std::invalid_argument("dropoff " + where(dropoff) + " is out of bounds");
    if (s.at(dropoff).kind == CellKind::Shelf)
        throw std::invalid_argument("dropoff " + where(dropoff) + " coincides with a shelf");
    s.at(dropoff).kind = CellKind::DropOff;
    s.dropoff = dropoff;

    for (const auto& [sku, entry] : initial_stock) {
        if (!s.in_bounds(entry.shelf))
            throw std::invalid_argument("stock for " + sku + " at " + where(entry.shelf) + " is out of bounds");
        if (s.at(entry.shelf).kind != CellKind::Shelf)
            throw std::invalid_argument("stock for " + sku + " assigned to non-shelf cell " + where(entry.shelf));
        if (entry.qty < 0) throw std::invalid_argument("stock for " + sku + " is negative");
        s.at(entry.shelf).inventory[sku] += entry.qty;
        s.sku_shelf[sku] = entry.shelf;
    }
    s.robot_pos = dropoff;
    return s;
}

inline void enqueue(WarehouseState& s, Order o) {
    validate_order(o);
    s.open_orders.push_back(std::move(o));
}

/// SKU the head-of-queue order still needs next, if any.
inline std::optional<Sku> next_needed_sku(const WarehouseState& s) {
    if (s.open_orders.empty()) return std::nullopt;
    int remaining = s.head_filled;
    for (const auto& line : s.open_orders.front().lines) {
        if (remaining < line.qty) return line.sku;
        remaining -= line.qty;
    }
    return std::nullopt;
}

inline GridPos target_shelf(const WarehouseState& s) {
    auto sku = next_needed_sku(s);
    if (!sku) return kNoTarget;
    auto it = s.sku_shelf.find(*sku);
    return it == s.sku_shelf.end() ? kNoTarget : it->second;
}

/// Tabular discretization of the state: position, carrying flag, target shelf.
struct StateId {
    GridPos robot_pos;
    bool carrying = false;
    GridPos target_shelf = kNoTarget;
    auto operator<=>(const StateId&) const = default;
};

struct StateIdHash {
    std::size_t operator()(const StateId& id) const noexcept {
        auto u = [](int v) { return static_cast<std::uint64_t>(static_cast<std::uint16_t>(v)); };
        std::uint64_t k = u(id.robot_pos.x) | (u(id.robot_pos.y) << 16) | (u(id.target_shelf.x) << 32) |
                          (u(id.target_shelf.y) << 48);
        k ^= id.carrying ? 0x9E3779B97F4A7C15ULL : 0;
        return std::hash<std::uint64_t>{}(k * 0xBF58476D1CE4E5B9ULL);
    }
};

inline StateId state_id(const WarehouseState& s) { return {s.robot_pos, s.carrying.has_value(), target_shelf(s)}; }

/// Upper bound on distinct StateIds: |cells| x 2 x (|shelves| + 1).
inline std::size_t state_space_size(const WarehouseState& s) {
    return static_cast<std::size_t>(s.width) * static_cast<std::size_t>(s.height) * 2 * (s.shelves().size() + 1);
}

/// True when a Pick issued now would lift the needed SKU.
inline bool pick_ready(const WarehouseState& s) {
    if (s.carrying) return false;
    auto sku = next_needed_sku(s);
    if (!sku) return false;
    auto it = s.sku_shelf.find(*sku);
    if (it == s.sku_shelf.end() || manhattan(s.robot_pos, it->second) != 1) return false;
    const auto& inv = s.at(it->second).inventory;
    auto stock = inv.find(*sku);
    return stock != inv.end() && stock->second > 0;
}

inline bool deliver_ready(const WarehouseState& s) { return s.carrying.has_value() && s.robot_pos == s.dropoff; }

/// Spends one tick without changing anything else and reports `outcome`.
/// Used when an external disturbance voids the intended action.
inline StepOutcome idle(WarehouseState& s, StepOutcome outcome) {
    ++s.tick;
    return outcome;
}

/// In-place transition. Illegal actions are no-ops with a failure outcome.
inline StepOutcome apply(WarehouseState& s, Action a) {
    ++s.tick;
    if (is_move(a)) {
        auto d = step_offset(a);
        GridPos next{s.robot_pos.x + d.x, s.robot_pos.y + d.y};
        if (!s.in_bounds(next) || s.at(next).kind == CellKind::Shelf) return StepOutcome::Blocked;
        s.robot_pos = next;
        return StepOutcome::Moved;
    }
    if (a == Action::Pick) {
        if (!pick_ready(s)) return StepOutcome::PickFailed;
        const Sku sku = *next_needed_sku(s);
        --s.at(s.sku_shelf.at(sku)).inventory.at(sku);
        s.carrying = sku;
        return StepOutcome::Picked;
    }
    if (!deliver_ready(s)) return StepOutcome::DeliverFailed;
    s.carrying.reset();
    ++s.delivered;
    if (!s.open_orders.empty()) {
        ++s.head_filled;
        if (s.head_filled >= s.open_orders.front().total_units()) {
            s.open_orders.pop_front();
            s.head_filled = 0;
            ++s.orders_completed;
        }
    }
    return StepOutcome::Delivered;
}

struct StepResult {
    WarehouseState state;
    StepOutcome outcome;
};

/// Pure form of `apply`.
inline StepResult transition(const WarehouseState& s, Action a) {
    StepResult r{s, StepOutcome::Blocked};
    r.outcome = apply(r.state, a);
    return r;
}

}  // namespace wps

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "support.hpp"
#include "wps/warehouse.hpp"

using namespace wps;
using namespace testing_support;

TEST(BuildWarehouse, InteriorShelfIsValid) {
    auto s = build_warehouse(3, 3, {{2, 1}}, {0, 0}, {{"A", {{2, 1}, 5}}});
    EXPECT_EQ(s.robot_pos, (GridPos{0, 0}));
    EXPECT_FALSE(s.carrying);
    EXPECT_TRUE(s.open_orders.empty());
    EXPECT_EQ(s.tick, 0);
    EXPECT_EQ(s.total_items(), 5);
    EXPECT_EQ(s.at({2, 1}).kind, CellKind::Shelf);
    EXPECT_EQ(s.at({0, 0}).kind, CellKind::DropOff);
}

TEST(BuildWarehouse, RejectsDropoffOnShelf) {
    EXPECT_THROW(build_warehouse(1, 1, {{0, 0}}, {0, 0}, {}), std::invalid_argument);
}

TEST(BuildWarehouse, RejectsOutOfBoundsAndNonShelfStock) {
    EXPECT_THROW(build_warehouse(3, 3, {{3, 0}}, {0, 0}, {}), std::invalid_argument);
    EXPECT_THROW(build_warehouse(3, 3, {{1, 1}}, {0, 5}, {}), std::invalid_argument);
    EXPECT_THROW(build_warehouse(3, 3, {{1, 1}}, {0, 0}, {{"A", {{2, 2}, 1}}}), std::invalid_argument);
    EXPECT_THROW(build_warehouse(0, 3, {}, {0, 0}, {}), std::invalid_argument);
}

TEST(StateId, SpaceSizeMatchesEnumeration) {
    std::map<Sku, StockEntry> stock;
    const std::vector<GridPos> shelves{{1, 1}, {3, 1}, {1, 3}, {3, 3}};
    for (int i = 0; i < 10; ++i) stock["S" + std::to_string(i)] = {shelves[static_cast<std::size_t>(i) % 4], 3};
    auto s = build_warehouse(5, 5, shelves, {0, 0}, stock);

    std::set<StateId> ids;
    std::vector<GridPos> targets(shelves);
    targets.push_back(kNoTarget);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x)
            for (bool c : {false, true})
                for (auto t : targets) ids.insert(StateId{{x, y}, c, t});
    EXPECT_EQ(ids.size(), 250u);
    EXPECT_EQ(state_space_size(s), 250u);
}

TEST(StateId, EmptyQueueUsesSentinelAndIgnoresTick) {
    auto s = build_warehouse(3, 3, {{1, 0}}, {0, 0}, {{"A", {{1, 0}, 5}}});
    EXPECT_EQ(state_id(s).target_shelf, kNoTarget);
    auto t = s;
    t.tick = 99;
    EXPECT_EQ(state_id(s), state_id(t));
    enqueue(s, Order{1, {{"A", 1}}, 0});
    EXPECT_EQ(state_id(s).target_shelf, (GridPos{1, 0}));
}

TEST(StateId, ReachableCountInTinyWorld) {
    auto start = tiny_world().build();
    std::set<decltype(search_key(start))> seen{search_key(start)};
    std::set<StateId> ids{state_id(start)};
    std::vector<WarehouseState> stack{start};
    while (!stack.empty()) {
        auto s = stack.back();
        stack.pop_back();
        for (auto a : kActions) {
            auto n = transition(s, a).state;
            if (seen.insert(search_key(n)).second) {
                ids.insert(state_id(n));
                stack.push_back(n);
            }
        }
    }
    EXPECT_LE(ids.size(), 36u);
    EXPECT_LE(ids.size(), state_space_size(start));
}

TEST(Transition, BoundaryMoveIsBlocked) {
    auto s = tiny_world().build();
    auto r = transition(s, Action::MoveW);
    EXPECT_EQ(r.outcome, StepOutcome::Blocked);
    EXPECT_EQ(r.state.robot_pos, s.robot_pos);
    EXPECT_EQ(r.state.tick, 1);
}

TEST(Transition, ShelfBlocksMovement) {
    auto s = tiny_world().build();
    auto r = transition(s, Action::MoveE);
    EXPECT_EQ(r.outcome, StepOutcome::Blocked);
    EXPECT_EQ(r.state.robot_pos, (GridPos{0, 0}));
    r = transition(s, Action::MoveS);
    EXPECT_EQ(r.outcome, StepOutcome::Moved);
    EXPECT_EQ(r.state.robot_pos, (GridPos{0, 1}));
}

TEST(Transition, PickThenDeliver) {
    auto s = tiny_world().build();
    auto r = transition(s, Action::Pick);
    ASSERT_EQ(r.outcome, StepOutcome::Picked);
    EXPECT_EQ(r.state.carrying, Sku("A"));
    EXPECT_EQ(r.state.at({1, 0}).inventory.at("A"), 4);
    auto r2 = transition(r.state, Action::Deliver);
    ASSERT_EQ(r2.outcome, StepOutcome::Delivered);
    EXPECT_TRUE(r2.state.open_orders.empty());
    EXPECT_EQ(r2.state.orders_completed, 1);
    EXPECT_EQ(r2.state.tick, 2);
    EXPECT_EQ(bfs_min_steps(s), 2);
}

TEST(Transition, IllegalPickAndDeliverFail) {
    auto s = tiny_world().build();
    EXPECT_EQ(transition(s, Action::Deliver).outcome, StepOutcome::DeliverFailed);
    auto away = transition(transition(s, Action::MoveS).state, Action::MoveS).state;
    EXPECT_EQ(transition(away, Action::Pick).outcome, StepOutcome::PickFailed);

    auto empty = tiny_world(0).build();
    EXPECT_EQ(transition(empty, Action::Pick).outcome, StepOutcome::PickFailed);

    auto carrying = transition(s, Action::Pick).state;
    EXPECT_EQ(transition(carrying, Action::Pick).outcome, StepOutcome::PickFailed);
}

TEST(Transition, MultiUnitOrderNeedsEveryUnit) {
    auto spec = tiny_world();
    spec.orders = {Order{0, {{"A", 2}}, 0}};
    auto s = spec.build();
    for (int i = 0; i < 2; ++i) {
        ASSERT_EQ(apply(s, Action::Pick), StepOutcome::Picked);
        ASSERT_EQ(apply(s, Action::Deliver), StepOutcome::Delivered);
    }
    EXPECT_TRUE(s.open_orders.empty());
    EXPECT_EQ(s.orders_completed, 1);
    EXPECT_EQ(s.delivered, 2);
}

TEST(Transition, PureAndTotalUnderRandomWalks) {
    std::mt19937_64 rng(7);
    auto s = default_world(3).build();
    std::uniform_int_distribution<int> sku(0, 4);
    const std::vector<Sku> cat{"A", "B", "C", "D", "E"};
    for (int i = 0; i < 20; ++i) enqueue(s, Order{i, {{cat[static_cast<std::size_t>(sku(rng))], 1}}, 0});
    const auto initial = s.total_items();
    std::uniform_int_distribution<std::size_t> act(0, kNumActions - 1);
    for (int t = 0; t < 5000; ++t) {
        const Action a = kActions[act(rng)];
        auto r1 = transition(s, a);
        auto r2 = transition(s, a);
        ASSERT_EQ(r1.state, r2.state);
        ASSERT_EQ(r1.outcome, r2.outcome);
        ASSERT_EQ(r1.state.tick, s.tick + 1);
        ASSERT_NE(r1.state.at(r1.state.robot_pos).kind, CellKind::Shelf);
        ASSERT_EQ(r1.state.total_items(), initial);
        s = r1.state;
    }
}

TEST(Orders, Validation) {
    EXPECT_THROW(validate_order(Order{0, {}, 0}), std::invalid_argument);
    EXPECT_THROW(validate_order(Order{0, {{"A", 0}}, 0}), std::invalid_argument);
    EXPECT_THROW(validate_order(Order{0, {{"A", 1}}, -1}), std::invalid_argument);
    EXPECT_NO_THROW(validate_order(Order{0, {{"A", 1}, {"B", 2}}, 3}));
}

TEST(Actions, NamesRoundTrip) {
    for (auto a : kActions) EXPECT_EQ(parse_action(to_string(a)), a);
    EXPECT_FALSE(parse_action("Jump"));
}

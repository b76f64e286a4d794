#pragma once

// Seeded episode runner: warehouse dynamics plus Poisson order arrivals,
// perception errors, hardware faults and environmental disturbances.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "wps/metrics.hpp"
#include "wps/perception.hpp"
#include "wps/qlearning.hpp"
#include "wps/rng.hpp"
#include "wps/warehouse.hpp"

namespace wps {

/// Per-level slopes of the two disturbance channels.
struct SeverityCoefficients {
    double slip_per_level = 0.02;
    double degradation_per_level = 0.03;

    void validate() const {
        if (!(slip_per_level > 0.0 && slip_per_level * 9.0 <= 1.0))
            throw std::invalid_argument("slip_per_level must be in (0, 1/9]");
        if (!(degradation_per_level > 0.0 && degradation_per_level * 9.0 < 1.0))
            throw std::invalid_argument("degradation_per_level must be in (0, 1/9)");
    }
    bool operator==(const SeverityCoefficients&) const = default;
};

struct SeverityModel {
    int level = 1;
    double slip_prob = 0.0;           // chance a Move becomes a no-op
    double sensor_degradation = 1.0;  // multiplies the run accuracy
};

inline SeverityModel severity_model(int level, const SeverityCoefficients& c = {}) {
    if (level < 1 || level > 10) throw std::invalid_argument("severity level must be in [1,10], got " + std::to_string(level));
    c.validate();
    const double k = static_cast<double>(level - 1);
    return {level, c.slip_per_level * k, 1.0 - c.degradation_per_level * k};
}

struct FaultModel {
    double per_pick_fault_prob = 0.0;
    double run_noise_sd = 0.0;

    void validate() const {
        if (!(per_pick_fault_prob >= 0.0 && per_pick_fault_prob <= 1.0))
            throw std::invalid_argument("per_pick_fault_prob must be in [0,1]");
        if (!(run_noise_sd >= 0.0)) throw std::invalid_argument("run_noise_sd must be non-negative");
    }
    bool operator==(const FaultModel&) const = default;
};

/// This run's fault probability: p * exp(sd*Z - sd^2/2), a mean-preserving
/// lognormal perturbation, capped at 1.
inline double realize_fault_prob(const FaultModel& f, Rng& rng) {
    f.validate();
    const double z = std::normal_distribution<double>(0.0, 1.0)(rng);
    if (f.run_noise_sd == 0.0) return f.per_pick_fault_prob;
    const double sd = f.run_noise_sd;
    return std::min(1.0, f.per_pick_fault_prob * std::exp(sd * z - 0.5 * sd * sd));
}

struct WarehouseSpec {
    int width = 0;
    int height = 0;
    std::vector<GridPos> shelves;
    GridPos dropoff;
    std::map<Sku, StockEntry> stock;
    std::vector<Order> orders;  // present at tick 0, ahead of any generated arrivals

    WarehouseState build() const {
        WarehouseState s = build_warehouse(width, height, shelves, dropoff, stock);
        for (const auto& o : orders) enqueue(s, o);
        return s;
    }

    std::vector<Sku> catalog() const {
        std::vector<Sku> out;
        for (const auto& [sku, e] : stock) out.push_back(sku);
        return out;
    }
    bool operator==(const WarehouseSpec&) const = default;
};

struct SimConfig {
    WarehouseSpec warehouse;
    double order_arrival_rate = 0.0;  // expected orders per 100 ticks
    ClassifierSpec classifier = builtin_spec("CNN");
    int severity = 1;
    SeverityCoefficients severity_coefficients;
    FaultModel fault;
    std::uint64_t seed = 0;
    std::int64_t max_steps = 1000;

    void validate() const {
        if (!(order_arrival_rate >= 0.0)) throw std::invalid_argument("order_arrival_rate must be non-negative");
        if (max_steps < 0) throw std::invalid_argument("max_steps must be non-negative");
        classifier.validate();
        fault.validate();
        severity_model(severity, severity_coefficients);
    }
};

/// Poisson arrivals with intensity rate/100 per tick over [0, horizon); one
/// single-unit line per order with a uniformly drawn SKU.
inline std::vector<Order> generate_orders(double rate, std::int64_t horizon, const std::vector<Sku>& catalog, Rng& rng,
                                          int first_id = 0) {
    if (!(rate >= 0.0)) throw std::invalid_argument("arrival rate must be non-negative");
    if (catalog.empty()) throw std::invalid_argument("catalog must not be empty");
    std::vector<Order> out;
    if (rate == 0.0 || horizon <= 0) return out;
    std::exponential_distribution<double> gap(rate / 100.0);
    std::uniform_int_distribution<std::size_t> sku(0, catalog.size() - 1);
    double t = 0.0;
    int id = first_id;
    for (;;) {
        t += gap(rng);
        if (t >= static_cast<double>(horizon)) break;
        out.push_back(Order{id++, {OrderLine{catalog[sku(rng)], 1}}, static_cast<std::int64_t>(t)});
    }
    return out;
}

struct EpisodeLog {
    std::int64_t steps = 0;
    std::int64_t picks_attempted = 0;  // picks that passed legality and reached the classifier
    std::int64_t picks_succeeded = 0;
    std::int64_t faults = 0;
    std::int64_t misidentifications = 0;
    std::int64_t slips = 0;
    std::int64_t orders_completed = 0;
    double total_reward = 0.0;
    std::int64_t initial_items = 0;
    std::int64_t final_items = 0;
    double drawn_accuracy = 0.0;  // the classifier instance's accuracy for this run, before degradation
    std::vector<Transition> transitions;  // only filled when requested

    bool operator==(const EpisodeLog& o) const {
        return steps == o.steps && picks_attempted == o.picks_attempted && picks_succeeded == o.picks_succeeded &&
               faults == o.faults && misidentifications == o.misidentifications && slips == o.slips &&
               orders_completed == o.orders_completed && total_reward == o.total_reward &&
               initial_items == o.initial_items && final_items == o.final_items &&
               drawn_accuracy == o.drawn_accuracy && transitions.size() == o.transitions.size();
    }
};

template <class P>
concept Policy = requires(const P& p, const StateId& s) {
    { p(s) } -> std::convertible_to<Action>;
};

/// Greedy policy over a trained table.
struct GreedyPolicy {
    const QTable* table;
    Action operator()(const StateId& s) const { return greedy_action(*table, s); }
};

struct EpisodeOptions {
    bool record_transitions = false;
    /// Invoked after every tick with the current state; used by invariant checks.
    std::function<void(const WarehouseState&)> observer;
};

/// Runs one seeded episode. The episode ends at max_steps or once every order
/// (initial and generated) has been delivered.
template <Policy P>
EpisodeLog run_episode(const SimConfig& config, const P& policy, const EpisodeOptions& options = {}) {
    config.validate();
    const SeverityModel sev = severity_model(config.severity, config.severity_coefficients);
    const RewardScheme reward;

    Rng order_rng = make_rng(config.seed, Stream::Orders);
    Rng perception_rng = make_rng(config.seed, Stream::Perception);
    Rng fault_rng = make_rng(config.seed, Stream::Fault);
    Rng slip_rng = make_rng(config.seed, Stream::Slip);

    WarehouseState state = config.warehouse.build();
    const std::vector<Sku> catalog = config.warehouse.catalog();
    std::map<Sku, std::vector<Sku>> decoys;
    for (const auto& sku : catalog) {
        auto& d = decoys[sku];
        for (const auto& other : catalog)
            if (other != sku) d.push_back(other);
        if (d.empty()) d.push_back("<unknown>");
    }

    std::vector<Order> arrivals;
    if (!catalog.empty())
        arrivals = generate_orders(config.order_arrival_rate, config.max_steps, catalog, order_rng,
                                   static_cast<int>(config.warehouse.orders.size()));
    std::size_t next_arrival = 0;

    const ClassifierInstance classifier = instantiate(config.classifier, perception_rng);
    const double accuracy = classifier.run_accuracy * sev.sensor_degradation;
    const double fault_prob = realize_fault_prob(config.fault, fault_rng);
    std::bernoulli_distribution fault_draw(fault_prob);

    EpisodeLog log;
    log.initial_items = state.total_items();
    log.drawn_accuracy = classifier.run_accuracy;
    auto all_done = [&] {
        return next_arrival == arrivals.size() && state.open_orders.empty() && !state.carrying;
    };

    while (state.tick < config.max_steps) {
        while (next_arrival < arrivals.size() && arrivals[next_arrival].arrival_tick <= state.tick)
            enqueue(state, arrivals[next_arrival++]);
        if (all_done()) break;

        const StateId s = state_id(state);
        const Action a = policy(s);
        const bool slipped = uniform01(slip_rng) < sev.slip_prob;

        StepOutcome outcome;
        if (is_move(a) && slipped) {
            ++log.slips;
            outcome = idle(state, StepOutcome::Blocked);
        } else if (a == Action::Pick && pick_ready(state)) {
            ++log.picks_attempted;
            const Sku needed = *next_needed_sku(state);
            const bool identified = classify(accuracy, needed, decoys.at(needed), perception_rng) == needed;
            const bool fault = fault_draw(fault_rng);
            if (!identified) ++log.misidentifications;
            if (fault) ++log.faults;
            if (identified && !fault) {
                ++log.picks_succeeded;
                outcome = apply(state, a);
            } else {
                outcome = idle(state, StepOutcome::PickFailed);
            }
        } else {
            outcome = apply(state, a);
        }

        const double r = reward(outcome);
        log.total_reward += r;
        ++log.steps;
        if (options.record_transitions) log.transitions.push_back({s, a, r, state_id(state), false});
        if (options.observer) options.observer(state);
    }
    log.orders_completed = state.orders_completed;
    log.final_items = state.total_items();
    return log;
}

/// Converts one episode (plus its severity-1 twin) into a run-level record.
template <Policy P>
RunRecord measure_run(const SimConfig& config, const P& policy) {
    const EpisodeLog log = run_episode(config, policy);
    std::int64_t baseline = log.orders_completed;
    if (config.severity != 1) {
        SimConfig pristine = config;
        pristine.severity = 1;
        baseline = run_episode(pristine, policy).orders_completed;
    }
    RunRecord rec;
    rec.classifier = config.classifier.name;
    rec.severity = config.severity;
    rec.seed = config.seed;
    rec.steps = log.steps;
    rec.orders_completed = log.orders_completed;
    if (log.picks_attempted == 0 || baseline == 0) {
        rec.valid = false;
        return rec;
    }
    const auto attempts = static_cast<double>(log.picks_attempted);
    rec.accuracy_pct = 100.0 * static_cast<double>(log.picks_succeeded) / attempts;
    rec.failure_rate_pct = 100.0 * static_cast<double>(log.faults) / attempts;
    rec.performance_score = 10.0 * static_cast<double>(log.orders_completed) / static_cast<double>(baseline);
    return rec;
}

/// Deterministic training environment: no perception errors, faults or slips.
/// Each episode starts at the dropoff with the spec's fixed orders, or with
/// `orders_per_episode` single-unit orders drawn uniformly from the catalog.
class TrainingEnv {
public:
    TrainingEnv(WarehouseSpec spec, int orders_per_episode, std::uint64_t seed, RewardScheme reward = {})
        : spec_(std::move(spec)),
          orders_per_episode_(orders_per_episode),
          rng_(make_rng(seed, Stream::Training)),
          reward_(reward),
          catalog_(spec_.catalog()) {
        if (spec_.orders.empty() && (orders_per_episode_ < 1 || catalog_.empty()))
            throw std::invalid_argument("training needs fixed orders or a positive orders_per_episode with stock");
        state_ = spec_.build();
    }

    StateId reset() {
        state_ = spec_.build();
        if (spec_.orders.empty()) {
            std::uniform_int_distribution<std::size_t> sku(0, catalog_.size() - 1);
            for (int i = 0; i < orders_per_episode_; ++i) enqueue(state_, Order{i, {OrderLine{catalog_[sku(rng_)], 1}}, 0});
        }
        return state_id(state_);
    }

    Transition step(Action a) {
        const StateId s = state_id(state_);
        const StepOutcome outcome = apply(state_, a);
        return {s, a, reward_(outcome), state_id(state_), state_.open_orders.empty()};
    }

    const WarehouseState& state() const { return state_; }

private:
    WarehouseSpec spec_;
    int orders_per_episode_;
    Rng rng_;
    RewardScheme reward_;
    std::vector<Sku> catalog_;
    WarehouseState state_;
};

}  // namespace wps

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slicing/numerology.hpp"
#include "slicing/traffic_model.hpp"

namespace slicing {

enum class InjectionMode { batch, poisson, batch_plus_poisson };

std::string_view to_string(InjectionMode m);

/// Injection of priority-class sessions starting at t_inject_ms.
///
/// A batch offers `batch_size` sessions one after another at t_inject_ms, each resolved by
/// the policy's admission rule. The Poisson tail runs at `poisson_rate` (per second, before
/// time scaling) from t_inject_ms and carries `poisson_sessions` fresh sessions (unbounded
/// when absent). With `retry_rejected`, every rejected injected session is re-offered on the
/// tail, which models repetition until the session gets through.
struct InjectionSchedule {
    InjectionMode mode = InjectionMode::batch;
    double t_inject_ms = 0.0;
    int batch_size = 0;
    double poisson_rate = 0.0;
    std::optional<long long> poisson_sessions;
    bool retry_rejected = false;

    bool has_batch() const { return mode != InjectionMode::poisson; }
    bool has_tail() const { return mode != InjectionMode::batch || retry_rejected; }
};

enum class Warmup { empty_start, stationary_video_start };

std::string_view to_string(Warmup w);

struct Scenario {
    std::string label;
    std::string description;
    std::string figure;

    Policy policy = Policy::nc1;
    RadioConfig radio;
    std::vector<TrafficClass> classes; // demands in allocation blocks
    std::optional<InjectionSchedule> injection;
    double horizon_ms = 0.0;
    Warmup warmup = Warmup::empty_start;
    std::optional<std::vector<int>> initial_counts;
    int replications = 1;
    std::uint64_t base_seed = 0;

    /// Multiplies every rate; 1000 reads per-second rates as per-millisecond rates.
    double time_scale = 1.0;
    /// Ends a replication once the priority class reaches its session cap.
    bool stop_at_priority_cap = false;
    double grid_ms = 10.0;

    LossModel model() const { return make_model(policy, classes, radio.capacity_blocks); }

    /// Throws ValidationError naming the violated invariant.
    void validate() const;
};

enum class EventKind {
    initial,
    arrival_accepted,
    arrival_rejected,
    arrival_downgraded,
    departure,
    preempt_discard,
    downgrade_cascade,
    batch_injection,
};

std::string_view to_string(EventKind k);
EventKind event_kind(TransitionKind k);

inline bool is_arrival(EventKind k) {
    return k == EventKind::arrival_accepted || k == EventKind::arrival_rejected ||
           k == EventKind::arrival_downgraded || k == EventKind::preempt_discard ||
           k == EventKind::downgrade_cascade;
}

/// One entry of the event log. For arrivals `cls` is the arriving class, for departures the
/// dimension that lost a session. A batch injection is logged as a single compound event
/// with `offered` and `admitted` sessions.
struct TrajectoryEvent {
    double t_ms = 0.0;
    EventKind kind = EventKind::initial;
    int cls = -1;
    int downgraded = 0;
    int discarded = 0;
    int offered = 0;
    int admitted = 0;
    bool injected = false;

    bool operator==(const TrajectoryEvent&) const = default;
};

/// Piecewise-constant occupancy path: the state after event i holds on [t_i, t_{i+1}).
class TrajectoryRecord {
public:
    TrajectoryRecord() = default;
    TrajectoryRecord(std::size_t dims, std::uint64_t seed) : dims_(dims), seed_(seed) {}

    void push(const TrajectoryEvent& e, const SystemState& after);
    void finish(double end_ms) { end_ms_ = end_ms; }

    std::size_t dimension_count() const { return dims_; }
    std::uint64_t seed() const { return seed_; }
    double end_ms() const { return end_ms_; }
    std::size_t size() const { return events_.size(); }

    const TrajectoryEvent& event(std::size_t i) const { return events_[i]; }
    const std::vector<TrajectoryEvent>& events() const { return events_; }
    std::span<const int> counts(std::size_t i) const { return {counts_.data() + i * dims_, dims_}; }
    SystemState state(std::size_t i) const;

    /// State holding at time t (right-continuous); t before the first event gives the initial state.
    SystemState state_at(double t_ms) const;
    /// Index of the event whose state holds at time t.
    std::size_t index_at(double t_ms) const;

    bool operator==(const TrajectoryRecord&) const = default;

private:
    std::size_t dims_ = 0;
    std::uint64_t seed_ = 0;
    double end_ms_ = 0.0;
    std::vector<TrajectoryEvent> events_;
    std::vector<int> counts_;
};

std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t replication);

/// One CTMC sample path over [0, horizon]. Every arrival source and the departure process
/// draw from their own stream derived from `seed`, so two policies run with the same seed
/// see identical arrival instants.
TrajectoryRecord run_replication(const Scenario& scenario, std::uint64_t seed);

/// All replications, replication r seeded with replication_seed(base_seed, r). `jobs` worker
/// threads share the work; the result does not depend on it.
std::vector<TrajectoryRecord> run_experiment(const Scenario& scenario, unsigned jobs = 1);

} // namespace slicing

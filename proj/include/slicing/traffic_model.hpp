#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace slicing {

enum class Policy { nc1, nc2, nc3 };
enum class Priority { high, low, none };

std::string_view to_string(Policy p);
std::string_view to_string(Priority p);

/// A traffic class offered to the shared pool. Rates are per second, demands in blocks.
struct TrafficClass {
    std::string name;
    double arrival_rate = 0.0;
    double service_rate = 1.0;
    int demand_blocks = 1;
    int max_sessions = 0;
    Priority priority = Priority::none;
    bool adaptive = false;
    int downgraded_demand_blocks = 0;
    std::optional<double> downgraded_service_rate; // defaults to service_rate
};

/// Occupancy vector: active sessions per dimension.
struct SystemState {
    std::vector<int> counts;

    SystemState() = default;
    explicit SystemState(std::vector<int> c) : counts(std::move(c)) {}
    SystemState(std::initializer_list<int> c) : counts(c) {}

    std::size_t size() const { return counts.size(); }
    int operator[](std::size_t i) const { return counts[i]; }
    int& operator[](std::size_t i) { return counts[i]; }

    auto operator<=>(const SystemState&) const = default;
};

/// One axis of the Markov state. NC3 splits the adaptive class into a full-rate and a
/// downgraded dimension; otherwise dimensions and classes coincide.
struct Dimension {
    std::string name;
    int demand_blocks = 1;
    int max_sessions = 0;
    double service_rate = 1.0;
};

/// Classes, policy and capacity bundled into the transition system they define.
///
/// Conventions: class 0 is the mission-critical (priority, injected) class. For NC2 and
/// NC3 there are exactly two classes and class 1 is the video class; NC3 appends the
/// downgraded-video dimension at index 2.
struct LossModel {
    Policy policy = Policy::nc1;
    int capacity = 0;
    std::vector<TrafficClass> classes;
    std::vector<Dimension> dims;

    static constexpr int priority_class = 0;
    static constexpr int video_class = 1;
    static constexpr int downgraded_dim = 2;

    std::size_t dimension_count() const { return dims.size(); }
    SystemState empty_state() const { return SystemState(std::vector<int>(dims.size(), 0)); }
};

/// Validates the class set against the policy and derives the dimensions.
/// Throws InvalidArgument on violation.
LossModel make_model(Policy policy, std::vector<TrafficClass> classes, int capacity_blocks);

enum class TransitionKind {
    arrival_accepted,
    arrival_rejected,
    arrival_downgraded,
    departure,
    preempt_discard,
    downgrade_cascade,
};

std::string_view to_string(TransitionKind k);

/// Resolution of one arrival; `downgraded` counts video sessions moved to the reduced rate
/// (including the arriving session for a downgraded admission), `discarded` counts
/// preempted video sessions.
struct ArrivalOutcome {
    TransitionKind kind = TransitionKind::arrival_rejected;
    SystemState target;
    int downgraded = 0;
    int discarded = 0;

    bool admitted() const { return kind != TransitionKind::arrival_rejected; }
};

struct Transition {
    SystemState target;
    double rate = 0.0;
    TransitionKind kind = TransitionKind::departure;
    int dimension = 0; // arriving class or departing dimension
    int downgraded = 0;
    int discarded = 0;
};

int occupied(const SystemState& state, const LossModel& model);
bool feasible(const SystemState& state, const LossModel& model);

/// Direct fit of one more session in dimension `dim`: capacity and per-dimension cap.
bool admissible(const SystemState& state, int dim, const LossModel& model);

/// Applies the model's admission rule (including any preemption or downgrade cascade) to
/// one arrival of class `cls`.
ArrivalOutcome resolve_arrival(const LossModel& model, const SystemState& state, int cls);

std::vector<Transition> transitions_nc1(const SystemState& state, const LossModel& model);
std::vector<Transition> transitions_nc2(const SystemState& state, const LossModel& model);
std::vector<Transition> transitions_nc3(const SystemState& state, const LossModel& model);

/// Dispatches on model.policy. Rejected arrivals appear as self-loops.
std::vector<Transition> transitions(const SystemState& state, const LossModel& model);

} // namespace slicing

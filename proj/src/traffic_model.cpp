#include "slicing/traffic_model.hpp"

#include <string>

#include "slicing/error.hpp"

namespace slicing {

std::string_view to_string(Policy p) {
    switch (p) {
    case Policy::nc1: return "NC1";
    case Policy::nc2: return "NC2";
    case Policy::nc3: return "NC3";
    }
    return "?";
}

std::string_view to_string(Priority p) {
    switch (p) {
    case Priority::high: return "high";
    case Priority::low: return "low";
    case Priority::none: return "none";
    }
    return "?";
}

std::string_view to_string(TransitionKind k) {
    switch (k) {
    case TransitionKind::arrival_accepted: return "arrival_accepted";
    case TransitionKind::arrival_rejected: return "arrival_rejected";
    case TransitionKind::arrival_downgraded: return "arrival_downgraded";
    case TransitionKind::departure: return "departure";
    case TransitionKind::preempt_discard: return "preempt_discard";
    case TransitionKind::downgrade_cascade: return "downgrade_cascade";
    }
    return "?";
}

LossModel make_model(Policy policy, std::vector<TrafficClass> classes, int capacity_blocks) {
    if (capacity_blocks <= 0) throw InvalidArgument("capacity must be at least one block");
    if (classes.empty()) throw InvalidArgument("at least one traffic class is required");

    for (const auto& c : classes) {
        if (c.demand_blocks < 1) throw InvalidArgument("class '" + c.name + "': demand must be >= 1 block");
        if (c.max_sessions < 0) throw InvalidArgument("class '" + c.name + "': negative session cap");
        if (!(c.arrival_rate >= 0.0)) throw InvalidArgument("class '" + c.name + "': negative arrival rate");
        if (!(c.service_rate > 0.0)) throw InvalidArgument("class '" + c.name + "': service rate must be positive");
        if (c.adaptive) {
            if (c.downgraded_demand_blocks < 1 || c.downgraded_demand_blocks >= c.demand_blocks)
                throw InvalidArgument("class '" + c.name + "': downgraded demand must be smaller than the full demand");
            if (c.downgraded_service_rate && !(*c.downgraded_service_rate > 0.0))
                throw InvalidArgument("class '" + c.name + "': downgraded service rate must be positive");
        }
    }

    auto require = [&](bool ok, const char* msg) {
        if (!ok) throw InvalidArgument(std::string(to_string(policy)) + ": " + msg);
    };

    switch (policy) {
    case Policy::nc1:
        for (const auto& c : classes)
            require(c.priority == Priority::none && !c.adaptive, "classes must be non-priority and non-adaptive");
        break;
    case Policy::nc2:
        require(classes.size() == 2, "exactly two classes (priority, video) are required");
        require(classes[0].priority == Priority::high, "class 0 must have high priority");
        require(classes[1].priority == Priority::low, "class 1 must have low priority");
        require(!classes[0].adaptive && !classes[1].adaptive, "classes must be non-adaptive");
        break;
    case Policy::nc3:
        require(classes.size() == 2, "exactly two classes (priority, adaptive video) are required");
        require(classes[0].priority == Priority::high, "class 0 must have high priority");
        require(classes[1].priority == Priority::low, "class 1 must have low priority");
        require(!classes[0].adaptive, "the priority class cannot be adaptive");
        require(classes[1].adaptive, "class 1 must be adaptive");
        break;
    }

    LossModel m;
    m.policy = policy;
    m.capacity = capacity_blocks;
    for (const auto& c : classes) m.dims.push_back({c.name, c.demand_blocks, c.max_sessions, c.service_rate});
    if (policy == Policy::nc3) {
        const auto& v = classes[1];
        m.dims.push_back({v.name + "_downgraded", v.downgraded_demand_blocks,
                          capacity_blocks / v.downgraded_demand_blocks,
                          v.downgraded_service_rate.value_or(v.service_rate)});
    }
    m.classes = std::move(classes);
    return m;
}

int occupied(const SystemState& state, const LossModel& model) {
    int total = 0;
    for (std::size_t i = 0; i < state.size(); ++i) total += state[i] * model.dims[i].demand_blocks;
    return total;
}

bool feasible(const SystemState& state, const LossModel& model) {
    if (state.size() != model.dims.size()) return false;
    for (std::size_t i = 0; i < state.size(); ++i)
        if (state[i] < 0 || state[i] > model.dims[i].max_sessions) return false;
    return occupied(state, model) <= model.capacity;
}

bool admissible(const SystemState& state, int dim, const LossModel& model) {
    const auto& d = model.dims.at(dim);
    return state[dim] + 1 <= d.max_sessions && occupied(state, model) + d.demand_blocks <= model.capacity;
}

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

ArrivalOutcome accept(SystemState s, int dim) {
    ++s[dim];
    return {TransitionKind::arrival_accepted, std::move(s), 0, 0};
}

ArrivalOutcome reject(const SystemState& s) { return {TransitionKind::arrival_rejected, s, 0, 0}; }

ArrivalOutcome arrive_nc1(const LossModel& m, const SystemState& s, int cls) {
    return admissible(s, cls, m) ? accept(s, cls) : reject(s);
}

// Priority arrival that may discard low-priority sessions, fewest first.
ArrivalOutcome arrive_nc2(const LossModel& m, const SystemState& s, int cls) {
    if (cls != LossModel::priority_class) return arrive_nc1(m, s, cls);
    const int p = LossModel::priority_class;
    const int v = LossModel::video_class;
    if (s[p] + 1 > m.dims[p].max_sessions) return reject(s);
    const int need = occupied(s, m) + m.dims[p].demand_blocks - m.capacity;
    if (need <= 0) return accept(s, p);
    const int victims = ceil_div(need, m.dims[v].demand_blocks);
    if (victims > s[v]) return reject(s);
    SystemState t = s;
    t[v] -= victims;
    ++t[p];
    return {TransitionKind::preempt_discard, std::move(t), 0, victims};
}

ArrivalOutcome arrive_nc3(const LossModel& m, const SystemState& s, int cls) {
    const int p = LossModel::priority_class;
    const int full = LossModel::video_class;
    const int down = LossModel::downgraded_dim;
    const int occ = occupied(s, m);

    if (cls == full) {
        if (admissible(s, full, m)) return accept(s, full);
        if (admissible(s, down, m)) {
            SystemState t = s;
            ++t[down];
            return {TransitionKind::arrival_downgraded, std::move(t), 1, 0};
        }
        return reject(s);
    }

    if (s[p] + 1 > m.dims[p].max_sessions) return reject(s);
    const int need = occ + m.dims[p].demand_blocks - m.capacity;
    if (need <= 0) return accept(s, p);

    // Downgrade full-rate sessions first; discard downgraded ones only once none is left.
    const int per_downgrade = m.dims[full].demand_blocks - m.dims[down].demand_blocks;
    const int downgrades = ceil_div(need, per_downgrade);
    SystemState t = s;
    ++t[p];
    if (downgrades <= s[full]) {
        t[full] -= downgrades;
        t[down] += downgrades;
        return {TransitionKind::downgrade_cascade, std::move(t), downgrades, 0};
    }
    const int remaining = need - s[full] * per_downgrade;
    const int discards = ceil_div(remaining, m.dims[down].demand_blocks);
    if (discards > s[down] + s[full]) return reject(s);
    t[down] += s[full] - discards;
    t[full] = 0;
    return {TransitionKind::preempt_discard, std::move(t), s[full], discards};
}

ArrivalOutcome arrive(Policy policy, const LossModel& m, const SystemState& s, int cls) {
    switch (policy) {
    case Policy::nc1: return arrive_nc1(m, s, cls);
    case Policy::nc2: return arrive_nc2(m, s, cls);
    case Policy::nc3: return arrive_nc3(m, s, cls);
    }
    return reject(s);
}

std::vector<Transition> generate(Policy policy, const SystemState& s, const LossModel& m) {
    std::vector<Transition> out;
    out.reserve(m.classes.size() + m.dims.size());
    for (std::size_t c = 0; c < m.classes.size(); ++c) {
        const double lambda = m.classes[c].arrival_rate;
        if (lambda <= 0.0) continue;
        auto o = arrive(policy, m, s, static_cast<int>(c));
        out.push_back({std::move(o.target), lambda, o.kind, static_cast<int>(c), o.downgraded, o.discarded});
    }
    for (std::size_t d = 0; d < m.dims.size(); ++d) {
        if (s[d] == 0) continue;
        SystemState t = s;
        --t[d];
        out.push_back({std::move(t), s[d] * m.dims[d].service_rate, TransitionKind::departure,
                       static_cast<int>(d), 0, 0});
    }
    return out;
}

void require_shape(const SystemState& s, const LossModel& m) {
    if (s.size() != m.dims.size()) throw InvalidArgument("state dimension does not match the model");
}

} // namespace

ArrivalOutcome resolve_arrival(const LossModel& model, const SystemState& state, int cls) {
    require_shape(state, model);
    if (cls < 0 || cls >= static_cast<int>(model.classes.size())) throw InvalidArgument("unknown class index");
    return arrive(model.policy, model, state, cls);
}

std::vector<Transition> transitions_nc1(const SystemState& state, const LossModel& model) {
    require_shape(state, model);
    return generate(Policy::nc1, state, model);
}

std::vector<Transition> transitions_nc2(const SystemState& state, const LossModel& model) {
    require_shape(state, model);
    if (model.classes.size() != 2) throw InvalidArgument("NC2 transitions need two classes");
    return generate(Policy::nc2, state, model);
}

std::vector<Transition> transitions_nc3(const SystemState& state, const LossModel& model) {
    require_shape(state, model);
    if (model.policy != Policy::nc3) throw InvalidArgument("NC3 transitions need an NC3 model");
    return generate(Policy::nc3, state, model);
}

std::vector<Transition> transitions(const SystemState& state, const LossModel& model) {
    switch (model.policy) {
    case Policy::nc1: return transitions_nc1(state, model);
    case Policy::nc2: return transitions_nc2(state, model);
    case Policy::nc3: return transitions_nc3(state, model);
    }
    return {};
}

} // namespace slicing

#include "slicing/analytic.hpp"

#include <functional>

namespace slicing {

namespace {

// Visits every feasible state in lexicographic order; stops early when visit returns false.
void for_each_feasible(const LossModel& model, const std::function<bool(const SystemState&)>& visit) {
    const auto n = model.dims.size();
    SystemState s(std::vector<int>(n, 0));
    bool keep_going = true;
    std::function<void(std::size_t, int)> rec = [&](std::size_t d, int used) {
        if (!keep_going) return;
        if (d == n) {
            keep_going = visit(s);
            return;
        }
        const auto& dim = model.dims[d];
        for (int k = 0; k <= dim.max_sessions && used + k * dim.demand_blocks <= model.capacity; ++k) {
            s[d] = k;
            rec(d + 1, used + k * dim.demand_blocks);
            if (!keep_going) break;
        }
        s[d] = 0;
    };
    rec(0, 0);
}

} // namespace

std::size_t count_feasible_states(const LossModel& model) {
    std::size_t count = 0;
    for_each_feasible(model, [&](const SystemState&) {
        ++count;
        return true;
    });
    return count;
}

StateSpace::StateSpace(const LossModel& model, std::size_t limit) {
    const auto total = count_feasible_states(model);
    if (total > limit) throw StateSpaceTooLarge(total, limit);

    radix_.resize(model.dims.size());
    std::uint64_t r = 1;
    for (std::size_t d = model.dims.size(); d-- > 0;) {
        radix_[d] = r;
        const auto span = static_cast<std::uint64_t>(std::min(model.dims[d].max_sessions,
                                                              model.capacity / model.dims[d].demand_blocks)) + 1;
        r *= span;
    }

    states_.reserve(total);
    index_.reserve(total);
    for_each_feasible(model, [&](const SystemState& s) {
        index_.emplace(key(s), states_.size());
        states_.push_back(s);
        return true;
    });
}

std::uint64_t StateSpace::key(const SystemState& s) const {
    std::uint64_t k = 0;
    for (std::size_t d = 0; d < s.size(); ++d) k += radix_[d] * static_cast<std::uint64_t>(s[d]);
    return k;
}

std::optional<std::size_t> StateSpace::find(const SystemState& s) const {
    if (s.size() != radix_.size()) return std::nullopt;
    for (std::size_t d = 0; d < s.size(); ++d)
        if (s[d] < 0) return std::nullopt;
    auto it = index_.find(key(s));
    if (it == index_.end() || states_[it->second] != s) return std::nullopt;
    return it->second;
}

std::size_t StateSpace::index_of(const SystemState& s) const {
    if (auto i = find(s)) return *i;
    throw InvalidArgument("state is not in the state space");
}

OccupancyDistribution<double> kaufman_roberts(const std::vector<TrafficClass>& classes, int capacity) {
    std::vector<OfferedClass> offered;
    for (const auto& c : classes) {
        if (c.priority != Priority::none || c.adaptive)
            throw InvalidArgument("Kaufman-Roberts applies to non-priority, non-adaptive classes only");
        if (!(c.service_rate > 0.0)) throw InvalidArgument("service rate must be positive");
        if (c.max_sessions < capacity / c.demand_blocks)
            throw InvalidArgument("class '" + c.name + "': session cap binds below capacity");
        offered.push_back({c.arrival_rate / c.service_rate, c.demand_blocks});
    }
    return kaufman_roberts<double>(std::span<const OfferedClass>(offered), capacity);
}

VectorX<double> occupancy_distribution(const StateSpace& space, const VectorX<double>& pi,
                                       const LossModel& model) {
    VectorX<double> q = VectorX<double>::Zero(model.capacity + 1);
    for (std::size_t i = 0; i < space.size(); ++i) q(occupied(space[i], model)) += pi(static_cast<Eigen::Index>(i));
    return q;
}

std::vector<double> stationary_blocking(const StateSpace& space, const VectorX<double>& pi,
                                        const LossModel& model) {
    std::vector<double> blocking(model.classes.size(), 0.0);
    for (std::size_t i = 0; i < space.size(); ++i) {
        const double p = pi(static_cast<Eigen::Index>(i));
        if (p == 0.0) continue;
        for (std::size_t c = 0; c < model.classes.size(); ++c)
            if (!resolve_arrival(model, space[i], static_cast<int>(c)).admitted()) blocking[c] += p;
    }
    return blocking;
}

std::vector<double> mean_sessions(const StateSpace& space, const VectorX<double>& pi) {
    std::vector<double> mean(space.size() ? space[0].size() : 0, 0.0);
    for (std::size_t i = 0; i < space.size(); ++i)
        for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += pi(static_cast<Eigen::Index>(i)) * space[i][d];
    return mean;
}

} // namespace slicing

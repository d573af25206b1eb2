#pragma once

// Shared fixtures and independent reference implementations for the test binaries.

#include <cmath>
#include <optional>
#include <vector>

#include "slicing/traffic_model.hpp"

namespace fixtures {

using slicing::LossModel;
using slicing::Policy;
using slicing::Priority;
using slicing::SystemState;
using slicing::TrafficClass;

// The two-class pool used by the reference scenarios: 62 blocks of 360 kHz,
// control sessions take one block, video takes two (one when downgraded).
inline LossModel reference_model(Policy policy, double video_rate = 1.0 / 20.0, double goose_rate = 1.0) {
    TrafficClass goose{"goose", goose_rate, 1.0 / 60.0, 1, 62, Priority::high, false, 0, std::nullopt};
    TrafficClass video{"video", video_rate, 1.0 / 600.0, 2, 31, Priority::low, false, 0, std::nullopt};
    if (policy == Policy::nc1) {
        goose.priority = Priority::none;
        video.priority = Priority::none;
    }
    if (policy == Policy::nc3) {
        video.adaptive = true;
        video.downgraded_demand_blocks = 1;
    }
    return slicing::make_model(policy, {goose, video}, 62);
}

// Erlang B by the standard recursion B(0) = 1, B(k) = a B(k-1) / (k + a B(k-1)).
inline double erlang_b(int servers, double load) {
    double b = 1.0;
    for (int k = 1; k <= servers; ++k) b = load * b / (k + load * b);
    return b;
}

// Every state with 0 <= w_i <= cap_i and sum w_i d_i <= C, by plain nested enumeration.
inline std::vector<SystemState> enumerate_states(const LossModel& m) {
    std::vector<SystemState> out;
    SystemState s = m.empty_state();
    const std::size_t n = s.size();
    while (true) {
        if (slicing::occupied(s, m) <= m.capacity) out.push_back(s);
        std::size_t i = n;
        while (i > 0) {
            --i;
            if (s[i] < m.dims[i].max_sessions) {
                ++s[i];
                for (std::size_t j = i + 1; j < n; ++j) s[j] = 0;
                break;
            }
            if (i == 0) return out;
        }
        if (n == 0) return out;
    }
}

struct CascadeChoice {
    int downgrades = 0;
    int discards = 0;
};

// Tries every combination of downgrades and discards for one priority arrival and
// returns the cheapest one: fewest discards, then fewest downgrades. Empty when no
// combination admits the session. For a model without a downgraded dimension only
// discards are tried.
inline std::optional<CascadeChoice> brute_force_priority_admission(const LossModel& m, const SystemState& s) {
    const int p = LossModel::priority_class;
    const int v = LossModel::video_class;
    const bool adaptive = m.policy == Policy::nc3;
    const int full = s[v];
    const int down = adaptive ? s[LossModel::downgraded_dim] : 0;

    std::optional<CascadeChoice> best;
    for (int d = 0; d <= (adaptive ? full : 0); ++d) {
        const int discard_pool = adaptive ? down + d : full;
        for (int x = 0; x <= discard_pool; ++x) {
            SystemState t = s;
            ++t[p];
            if (adaptive) {
                t[v] -= d;
                t[LossModel::downgraded_dim] += d - x;
            } else {
                t[v] -= x;
            }
            if (!slicing::feasible(t, m)) continue;
            if (!best || x < best->discards || (x == best->discards && d < best->downgrades)) best = CascadeChoice{d, x};
        }
    }
    return best;
}

// Sample mean and the 95% half-width of a t interval with the given quantile.
struct Interval {
    double mean = 0.0;
    double half_width = 0.0;
    double lo() const { return mean - half_width; }
    double hi() const { return mean + half_width; }
};

inline Interval t_interval(double mean, double variance, std::size_t n, double quantile) {
    return {mean, quantile * std::sqrt(variance / static_cast<double>(n))};
}

} // namespace fixtures

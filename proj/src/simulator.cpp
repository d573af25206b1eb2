#include "slicing/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

#include "slicing/analytic.hpp"
#include "slicing/error.hpp"
#include "slicing/rng.hpp"

namespace slicing {

std::string_view to_string(InjectionMode m) {
    switch (m) {
    case InjectionMode::batch: return "batch";
    case InjectionMode::poisson: return "poisson";
    case InjectionMode::batch_plus_poisson: return "batch_plus_poisson";
    }
    return "?";
}

std::string_view to_string(Warmup w) {
    switch (w) {
    case Warmup::empty_start: return "empty_start";
    case Warmup::stationary_video_start: return "stationary_video_start";
    }
    return "?";
}

std::string_view to_string(EventKind k) {
    switch (k) {
    case EventKind::initial: return "initial";
    case EventKind::arrival_accepted: return "arrival_accepted";
    case EventKind::arrival_rejected: return "arrival_rejected";
    case EventKind::arrival_downgraded: return "arrival_downgraded";
    case EventKind::departure: return "departure";
    case EventKind::preempt_discard: return "preempt_discard";
    case EventKind::downgrade_cascade: return "downgrade_cascade";
    case EventKind::batch_injection: return "batch_injection";
    }
    return "?";
}

EventKind event_kind(TransitionKind k) {
    switch (k) {
    case TransitionKind::arrival_accepted: return EventKind::arrival_accepted;
    case TransitionKind::arrival_rejected: return EventKind::arrival_rejected;
    case TransitionKind::arrival_downgraded: return EventKind::arrival_downgraded;
    case TransitionKind::departure: return EventKind::departure;
    case TransitionKind::preempt_discard: return EventKind::preempt_discard;
    case TransitionKind::downgrade_cascade: return EventKind::downgrade_cascade;
    }
    return EventKind::initial;
}

void Scenario::validate() const {
    auto fail = [](const std::string& msg) { throw ValidationError(msg); };

    if (!(horizon_ms > 0.0)) fail("horizon_ms must be positive");
    if (replications < 1) fail("replications must be at least 1");
    if (!(time_scale > 0.0)) fail("time_scale must be positive");
    if (!(grid_ms > 0.0)) fail("grid_ms must be positive");
    if (radio.capacity_blocks < 1) fail("capacity must be at least one allocation block");

    LossModel m;
    try {
        m = model();
    } catch (const InvalidArgument& e) {
        fail(e.what());
    }

    if (injection) {
        const auto& inj = *injection;
        if (!(inj.t_inject_ms >= 0.0)) fail("t_inject_ms must be non-negative");
        if (!(horizon_ms > inj.t_inject_ms)) fail("horizon_ms must exceed t_inject_ms");
        if (inj.batch_size < 0) fail("batch_size must be non-negative");
        if (!(inj.poisson_rate >= 0.0)) fail("poisson_rate must be non-negative");
        if (inj.poisson_sessions && *inj.poisson_sessions < 0) fail("poisson_sessions must be non-negative");
        if (inj.mode == InjectionMode::batch && inj.batch_size == 0) fail("batch injection needs batch_size > 0");
        if (inj.mode == InjectionMode::poisson && inj.poisson_rate == 0.0) fail("poisson injection needs poisson_rate > 0");
        if (!(inj.batch_size > 0 || inj.poisson_rate > 0.0)) fail("injection needs batch_size > 0 or poisson_rate > 0");
        if (inj.has_tail() && inj.poisson_rate == 0.0) fail("the injection tail needs poisson_rate > 0");
    }

    if (initial_counts) {
        if (warmup != Warmup::empty_start) fail("initial_counts cannot be combined with a stationary warm-up");
        if (!feasible(SystemState(*initial_counts), m)) fail("initial_counts is not a feasible state");
    }
    if (warmup == Warmup::stationary_video_start && classes.size() < 2)
        fail("stationary_video_start needs a video class");
}

void TrajectoryRecord::push(const TrajectoryEvent& e, const SystemState& after) {
    events_.push_back(e);
    counts_.insert(counts_.end(), after.counts.begin(), after.counts.end());
}

SystemState TrajectoryRecord::state(std::size_t i) const {
    auto c = counts(i);
    return SystemState(std::vector<int>(c.begin(), c.end()));
}

std::size_t TrajectoryRecord::index_at(double t_ms) const {
    auto it = std::upper_bound(events_.begin(), events_.end(), t_ms,
                               [](double t, const TrajectoryEvent& e) { return t < e.t_ms; });
    if (it == events_.begin()) return 0;
    return static_cast<std::size_t>(std::distance(events_.begin(), it)) - 1;
}

SystemState TrajectoryRecord::state_at(double t_ms) const { return state(index_at(t_ms)); }

std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t replication) {
    return deterministic_mix(base_seed, replication);
}

namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();

// Stream identifiers below a replication seed.
constexpr std::uint64_t kDepartureStream = 1000;
constexpr std::uint64_t kInjectionStream = 1001;
constexpr std::uint64_t kWarmupStream = 1002;

class Replication {
public:
    Replication(const Scenario& sc, std::uint64_t seed)
        : sc_(sc), model_(sc.model()), per_ms_(sc.time_scale / 1000.0),
          departures_(deterministic_mix(seed, kDepartureStream)),
          injection_stream_(deterministic_mix(seed, kInjectionStream)),
          record_(model_.dimension_count(), seed) {
        for (std::size_t c = 0; c < model_.classes.size(); ++c)
            arrivals_.emplace_back(deterministic_mix(seed, c));
        state_ = initial_state(seed);
    }

    TrajectoryRecord run() {
        record_.push({0.0, EventKind::initial}, state_);

        next_arrival_.assign(model_.classes.size(), kNever);
        for (std::size_t c = 0; c < model_.classes.size(); ++c) {
            const double r = model_.classes[c].arrival_rate * per_ms_;
            if (r > 0.0) next_arrival_[c] = arrivals_[c].exponential(r);
        }
        redraw_departure(0.0);

        const InjectionSchedule* inj = sc_.injection ? &*sc_.injection : nullptr;
        double injection_at = inj ? inj->t_inject_ms : kNever;
        if (inj) {
            fresh_unbounded_ = inj->mode != InjectionMode::batch && !inj->poisson_sessions;
            fresh_left_ = inj->mode == InjectionMode::batch ? 0 : inj->poisson_sessions.value_or(0);
        }

        double now = 0.0;
        double end = sc_.horizon_ms;
        while (true) {
            std::size_t arrival_cls = 0;
            double t_arrival = kNever;
            for (std::size_t c = 0; c < next_arrival_.size(); ++c)
                if (next_arrival_[c] < t_arrival) {
                    t_arrival = next_arrival_[c];
                    arrival_cls = c;
                }
            const double t_next = std::min({t_arrival, next_departure_, next_tail_, injection_at});
            if (t_next > sc_.horizon_ms) break;
            now = t_next;

            if (t_next == injection_at) {
                injection_at = kNever;
                inject_batch(now, *inj);
                tail_started_ = true;
                schedule_tail(now);
            } else if (t_next == next_tail_) {
                tail_arrival(now);
            } else if (t_next == next_departure_) {
                departure(now);
            } else {
                background_arrival(now, arrival_cls);
            }

            if (sc_.stop_at_priority_cap &&
                state_[LossModel::priority_class] >= model_.dims[LossModel::priority_class].max_sessions) {
                end = now;
                break;
            }
        }
        record_.finish(end);
        return std::move(record_);
    }

private:
    SystemState initial_state(std::uint64_t seed) {
        if (sc_.initial_counts) return SystemState(*sc_.initial_counts);
        SystemState s = model_.empty_state();
        if (sc_.warmup == Warmup::stationary_video_start) {
            // Video-only stationary occupancy, the session cap folded into the capacity.
            const auto& video = model_.classes[LossModel::video_class];
            const int cap = std::min(model_.capacity, video.max_sessions * video.demand_blocks);
            if (cap > 0) {
                const OfferedClass offered[] = {{video.arrival_rate / video.service_rate, video.demand_blocks}};
                const auto dist = kaufman_roberts<double>(offered, cap);
                Stream warm(deterministic_mix(seed, kWarmupStream));
                double u = warm.uniform();
                int c = 0;
                for (; c < cap; ++c) {
                    u -= dist.q(c);
                    if (u <= 0.0) break;
                }
                s[LossModel::video_class] = c / video.demand_blocks;
            }
        }
        return s;
    }

    void check_feasible() const {
        if (!feasible(state_, model_)) throw std::logic_error("simulator reached an infeasible state");
    }

    void redraw_departure(double now) {
        double total = 0.0;
        for (std::size_t d = 0; d < model_.dims.size(); ++d) total += state_[d] * model_.dims[d].service_rate;
        total *= per_ms_;
        next_departure_ = total > 0.0 ? now + departures_.exponential(total) : kNever;
    }

    void schedule_tail(double now) {
        const bool pending = retry_pending_ > 0 || fresh_unbounded_ || fresh_left_ > 0;
        if (!tail_started_ || !pending) {
            next_tail_ = kNever;
            return;
        }
        next_tail_ = now + injection_stream_.exponential(sc_.injection->poisson_rate * per_ms_);
    }

    // Returns true when the state changed.
    bool apply_arrival(double now, int cls, bool injected) {
        const auto outcome = resolve_arrival(model_, state_, cls);
        TrajectoryEvent e{now, event_kind(outcome.kind), cls, outcome.downgraded, outcome.discarded, 1,
                          outcome.admitted() ? 1 : 0, injected};
        const bool changed = outcome.target != state_;
        state_ = outcome.target;
        check_feasible();
        record_.push(e, state_);
        return changed;
    }

    void background_arrival(double now, std::size_t cls) {
        const double r = model_.classes[cls].arrival_rate * per_ms_;
        next_arrival_[cls] = now + arrivals_[cls].exponential(r);
        if (apply_arrival(now, static_cast<int>(cls), false)) redraw_departure(now);
    }

    void tail_arrival(double now) {
        if (retry_pending_ > 0)
            --retry_pending_;
        else if (!fresh_unbounded_)
            --fresh_left_;
        const bool changed = apply_arrival(now, LossModel::priority_class, true);
        if (record_.events().back().kind == EventKind::arrival_rejected && sc_.injection->retry_rejected)
            ++retry_pending_;
        schedule_tail(now);
        if (changed) redraw_departure(now);
    }

    void inject_batch(double now, const InjectionSchedule& inj) {
        if (!inj.has_batch() || inj.batch_size == 0) return;
        TrajectoryEvent e{now, EventKind::batch_injection, LossModel::priority_class, 0, 0, inj.batch_size, 0, true};
        for (int k = 0; k < inj.batch_size; ++k) {
            const auto outcome = resolve_arrival(model_, state_, LossModel::priority_class);
            if (outcome.admitted()) {
                ++e.admitted;
                e.downgraded += outcome.downgraded;
                e.discarded += outcome.discarded;
                state_ = outcome.target;
            } else if (inj.retry_rejected) {
                ++retry_pending_;
            }
        }
        check_feasible();
        record_.push(e, state_);
        redraw_departure(now);
    }

    void departure(double now) {
        double total = 0.0;
        for (std::size_t d = 0; d < model_.dims.size(); ++d) total += state_[d] * model_.dims[d].service_rate;
        double pick = departures_.uniform() * total;
        std::size_t dim = 0;
        for (; dim + 1 < model_.dims.size(); ++dim) {
            pick -= state_[dim] * model_.dims[dim].service_rate;
            if (pick < 0.0) break;
        }
        while (state_[dim] == 0) --dim; // rounding guard at the upper end
        --state_[dim];
        check_feasible();
        record_.push({now, EventKind::departure, static_cast<int>(dim)}, state_);
        redraw_departure(now);
    }

    const Scenario& sc_;
    LossModel model_;
    double per_ms_;
    std::vector<Stream> arrivals_;
    Stream departures_;
    Stream injection_stream_;
    TrajectoryRecord record_;
    SystemState state_;

    std::vector<double> next_arrival_;
    double next_departure_ = kNever;
    double next_tail_ = kNever;
    bool tail_started_ = false;
    bool fresh_unbounded_ = false;
    long long fresh_left_ = 0;
    long long retry_pending_ = 0;
};

} // namespace

TrajectoryRecord run_replication(const Scenario& scenario, std::uint64_t seed) {
    scenario.validate();
    return Replication(scenario, seed).run();
}

std::vector<TrajectoryRecord> run_experiment(const Scenario& scenario, unsigned jobs) {
    scenario.validate();
    const auto n = static_cast<std::size_t>(scenario.replications);
    std::vector<TrajectoryRecord> out(n);
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    auto work = [&] {
        for (std::size_t r = next++; r < n; r = next++) {
            try {
                out[r] = Replication(scenario, replication_seed(scenario.base_seed, r)).run();
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    if (jobs == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(work);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

} // namespace slicing

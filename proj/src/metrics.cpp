#include "slicing/metrics.hpp"

#include <cmath>

#include "slicing/error.hpp"

namespace slicing {

std::vector<double> time_grid(double horizon_ms, double step_ms) {
    if (!(step_ms > 0.0)) throw InvalidArgument("grid step must be positive");
    std::vector<double> grid;
    const auto steps = static_cast<long long>(std::floor(horizon_ms / step_ms + 1e-9));
    grid.reserve(static_cast<std::size_t>(steps + 1));
    for (long long k = 0; k <= steps; ++k) grid.push_back(static_cast<double>(k) * step_ms);
    return grid;
}

Utilization utilization(const TrajectoryRecord& trajectory, const LossModel& model, std::span<const double> grid) {
    Utilization u;
    const double cap = model.capacity;
    u.rho_t.reserve(grid.size());
    for (double t : grid) u.rho_t.push_back(occupied(trajectory.state_at(t), model) / cap);

    const double end = trajectory.end_ms();
    if (end <= 0.0 || trajectory.size() == 0) {
        u.rho_avg = trajectory.size() ? occupied(trajectory.state(0), model) / cap : 0.0;
        return u;
    }
    double area = 0.0;
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        const double from = trajectory.event(i).t_ms;
        const double to = i + 1 < trajectory.size() ? trajectory.event(i + 1).t_ms : end;
        if (to <= from) continue;
        int blocks = 0;
        auto c = trajectory.counts(i);
        for (std::size_t d = 0; d < c.size(); ++d) blocks += c[d] * model.dims[d].demand_blocks;
        area += blocks * (to - from);
    }
    u.rho_avg = area / (cap * end);
    return u;
}

std::vector<double> session_time_integrals(const TrajectoryRecord& trajectory) {
    std::vector<double> total(trajectory.dimension_count(), 0.0);
    const double end = trajectory.end_ms();
    for (std::size_t d = 0; d < total.size(); ++d) {
        for (std::size_t i = 0; i < trajectory.size(); ++i) {
            const double from = trajectory.event(i).t_ms;
            const double to = i + 1 < trajectory.size() ? trajectory.event(i + 1).t_ms : end;
            if (to > from) total[d] += trajectory.counts(i)[d] * (to - from);
        }
    }
    return total;
}

std::vector<std::vector<double>> sessions_on_grid(const TrajectoryRecord& trajectory, std::span<const double> grid) {
    std::vector<std::vector<double>> out(trajectory.dimension_count(), std::vector<double>(grid.size(), 0.0));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        auto c = trajectory.counts(trajectory.index_at(grid[k]));
        for (std::size_t d = 0; d < c.size(); ++d) out[d][k] = c[d];
    }
    return out;
}

BurstTimes burst_period(const TrajectoryRecord& trajectory, double t_inject_ms) {
    constexpr int p = LossModel::priority_class;
    std::optional<double> first_entry;
    std::optional<double> last_present;
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        const int now = trajectory.counts(i)[p];
        const int before = i == 0 ? 0 : trajectory.counts(i - 1)[p];
        if (now > before && !first_entry) first_entry = trajectory.event(i).t_ms;
        if (now > 0) last_present = i + 1 < trajectory.size() ? trajectory.event(i + 1).t_ms : trajectory.end_ms();
    }
    BurstTimes b;
    if (!last_present || *last_present <= t_inject_ms) return b;
    b.period_ms = *last_present - t_inject_ms;
    if (first_entry) b.duration_ms = *last_present - *first_entry;
    return b;
}

Ratios ratios(const TrajectoryRecord& trajectory, double from_ms, RvWindow rv) {
    constexpr int p = LossModel::priority_class;
    Ratios r;
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
        const auto& e = trajectory.event(i);
        if (e.t_ms < from_ms) continue;
        if (e.cls == p && (is_arrival(e.kind) || e.kind == EventKind::batch_injection)) {
            r.priority.offered += e.offered;
            r.priority.admitted += e.admitted;
        }
        // Cascades triggered by priority arrivals still count against video.
        r.video.downgraded += e.downgraded;
        r.video.discarded += e.discarded;
        if (e.cls == p || !is_arrival(e.kind)) continue;

        ++r.video.arrivals;
        switch (e.kind) {
        case EventKind::arrival_accepted: ++r.video.accepted_full; break;
        case EventKind::arrival_downgraded: ++r.video.admitted_downgraded; break;
        case EventKind::arrival_rejected: ++r.video.rejected; break;
        default: break;
        }
        const bool counts_for_rv = rv == RvWindow::whole_window || trajectory.counts(i - 1)[p] == 0;
        if (counts_for_rv) {
            ++r.r_v_arrivals;
            if (e.kind == EventKind::arrival_rejected) ++r.r_v_rejected;
        }
    }
    if (r.video.arrivals > 0) {
        const double n = static_cast<double>(r.video.arrivals);
        r.r_rj = r.video.rejected / n;
        r.r_dw = r.video.downgraded / n;
        r.r_dc = r.video.discarded / n;
    }
    if (r.r_v_arrivals > 0) r.r_v = static_cast<double>(r.r_v_rejected) / static_cast<double>(r.r_v_arrivals);
    return r;
}

ReplicationSummary summarize(const TrajectoryRecord& trajectory, const Scenario& scenario) {
    const auto model = scenario.model();
    ReplicationSummary s;
    s.seed = trajectory.seed();
    s.grid_ms = time_grid(scenario.horizon_ms, scenario.grid_ms);
    auto u = utilization(trajectory, model, s.grid_ms);
    s.rho_avg = u.rho_avg;
    s.rho_t = std::move(u.rho_t);
    s.sessions_t = sessions_on_grid(trajectory, s.grid_ms);
    const double t_inject = scenario.injection ? scenario.injection->t_inject_ms : 0.0;
    if (scenario.injection) s.burst = burst_period(trajectory, t_inject);
    s.whole = ratios(trajectory, 0.0);
    s.post_injection = ratios(trajectory, t_inject);
    return s;
}

Moments moments(std::span<const double> values) {
    Moments m;
    m.n = values.size();
    if (m.n == 0) return m;
    double sum = 0.0;
    for (double v : values) sum += v;
    m.mean = sum / static_cast<double>(m.n);
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.variance = m.n > 1 ? ss / static_cast<double>(m.n - 1) : 0.0;
    return m;
}

Moments moments(std::span<const std::optional<double>> values) {
    std::vector<double> present;
    for (const auto& v : values)
        if (v) present.push_back(*v);
    return moments(std::span<const double>(present));
}

namespace {

template <typename Get>
Moments collect(std::span<const ReplicationSummary> s, Get get) {
    std::vector<std::optional<double>> v;
    v.reserve(s.size());
    for (const auto& r : s) v.push_back(get(r));
    return moments(std::span<const std::optional<double>>(v));
}

} // namespace

ExperimentSummary aggregate(std::span<const ReplicationSummary> summaries) {
    if (summaries.empty()) throw InvalidArgument("nothing to aggregate");
    const auto& grid = summaries.front().grid_ms;
    const auto dims = summaries.front().sessions_t.size();
    for (const auto& s : summaries)
        if (s.grid_ms != grid || s.sessions_t.size() != dims || s.rho_t.size() != grid.size())
            throw InvalidArgument("replication summaries use different grids");

    ExperimentSummary e;
    e.replications = summaries.size();
    e.rho_avg = collect(summaries, [](const auto& r) { return std::optional<double>(r.rho_avg); });
    e.burst_period_ms = collect(summaries, [](const auto& r) { return r.burst.period_ms; });
    e.burst_duration_ms = collect(summaries, [](const auto& r) { return r.burst.duration_ms; });
    e.r_rj = collect(summaries, [](const auto& r) { return r.whole.r_rj; });
    e.r_dw = collect(summaries, [](const auto& r) { return r.whole.r_dw; });
    e.r_dc = collect(summaries, [](const auto& r) { return r.whole.r_dc; });
    e.r_v = collect(summaries, [](const auto& r) { return r.whole.r_v; });
    e.n_ga = collect(summaries, [](const auto& r) { return std::optional<double>(r.whole.video.arrivals); });
    e.r_rj_post = collect(summaries, [](const auto& r) { return r.post_injection.r_rj; });
    e.r_dw_post = collect(summaries, [](const auto& r) { return r.post_injection.r_dw; });
    e.r_dc_post = collect(summaries, [](const auto& r) { return r.post_injection.r_dc; });
    e.n_ga_post = collect(summaries, [](const auto& r) { return std::optional<double>(r.post_injection.video.arrivals); });

    e.grid_ms = grid;
    e.mean_sessions.assign(dims, std::vector<double>(grid.size()));
    e.var_sessions.assign(dims, std::vector<double>(grid.size()));
    e.mean_rho.assign(grid.size(), 0.0);
    std::vector<double> column(summaries.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        for (std::size_t d = 0; d < dims; ++d) {
            for (std::size_t r = 0; r < summaries.size(); ++r) column[r] = summaries[r].sessions_t[d][k];
            const auto m = moments(std::span<const double>(column));
            e.mean_sessions[d][k] = m.mean;
            e.var_sessions[d][k] = m.variance;
        }
        for (std::size_t r = 0; r < summaries.size(); ++r) column[r] = summaries[r].rho_t[k];
        e.mean_rho[k] = moments(std::span<const double>(column)).mean;
    }
    return e;
}

} // namespace slicing

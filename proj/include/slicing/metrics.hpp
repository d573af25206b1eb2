#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "slicing/simulator.hpp"
#include "slicing/traffic_model.hpp"

namespace slicing {

/// Reporting grid 0, step, 2 step, ... up to and including `horizon_ms`.
std::vector<double> time_grid(double horizon_ms, double step_ms);

struct Utilization {
    std::vector<double> rho_t; // on the grid
    double rho_avg = 0.0;      // exact time average over [0, end]
};

/// rho(t) = occupied blocks / C on the grid, and its exact time average.
Utilization utilization(const TrajectoryRecord& trajectory, const LossModel& model, std::span<const double> grid);

/// Integral of M_i(t) over [0, end] for every dimension.
std::vector<double> session_time_integrals(const TrajectoryRecord& trajectory);

/// Sessions per dimension sampled on the grid; grid[k] -> result[dim][k].
std::vector<std::vector<double>> sessions_on_grid(const TrajectoryRecord& trajectory, std::span<const double> grid);

struct BurstTimes {
    std::optional<double> period_ms;   // last instant with priority sessions present - T_I
    std::optional<double> duration_ms; // same end, measured from the first priority admission
};

/// Both measures are absent when no priority session is present after t_inject_ms. A burst
/// still running at the end of the trajectory is censored at the end time.
BurstTimes burst_period(const TrajectoryRecord& trajectory, double t_inject_ms);

struct VideoCounts {
    long long arrivals = 0; // n_ga
    long long accepted_full = 0;
    long long admitted_downgraded = 0;
    long long rejected = 0;
    long long downgraded = 0; // cascade downgrades plus downgraded admissions
    long long discarded = 0;
};

struct PriorityCounts {
    long long offered = 0;
    long long admitted = 0;
    long long rejected() const { return offered - admitted; }
};

struct Ratios {
    VideoCounts video;
    PriorityCounts priority;
    std::optional<double> r_rj;
    std::optional<double> r_dw;
    std::optional<double> r_dc;
    std::optional<double> r_v;
    long long r_v_arrivals = 0;
    long long r_v_rejected = 0;
};

enum class RvWindow {
    priority_absent, // video arrivals that find no priority session in the system
    whole_window,
};

/// Ratios over events with from_ms <= t <= end. Video sessions are every class other than
/// the priority class.
Ratios ratios(const TrajectoryRecord& trajectory, double from_ms = 0.0, RvWindow rv = RvWindow::priority_absent);

struct ReplicationSummary {
    std::uint64_t seed = 0;
    std::vector<double> grid_ms;
    double rho_avg = 0.0;
    std::vector<double> rho_t;
    std::vector<std::vector<double>> sessions_t; // [dim][grid]
    BurstTimes burst;
    Ratios whole;          // observation window [0, T]
    Ratios post_injection; // window [T_I, T]
};

ReplicationSummary summarize(const TrajectoryRecord& trajectory, const Scenario& scenario);

/// Unbiased sample moments of the present values; n == 0 leaves mean and variance NaN.
struct Moments {
    std::size_t n = 0;
    double mean = std::numeric_limits<double>::quiet_NaN();
    double variance = std::numeric_limits<double>::quiet_NaN();
};

Moments moments(std::span<const std::optional<double>> values);
Moments moments(std::span<const double> values);

struct ExperimentSummary {
    std::size_t replications = 0;
    Moments rho_avg, burst_period_ms, burst_duration_ms;
    Moments r_rj, r_dw, r_dc, r_v, n_ga;
    Moments r_rj_post, r_dw_post, r_dc_post, n_ga_post;

    std::vector<double> grid_ms;
    std::vector<std::vector<double>> mean_sessions; // [dim][grid]
    std::vector<std::vector<double>> var_sessions;
    std::vector<double> mean_rho;
};

/// Throws InvalidArgument for an empty input or misaligned grids.
ExperimentSummary aggregate(std::span<const ReplicationSummary> summaries);

} // namespace slicing

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "slicing/metrics.hpp"
#include "slicing/simulator.hpp"

namespace slicing {

enum class RunMode { simulate, analytic, both };

RunMode parse_run_mode(const std::string& s);

struct RunOptions {
    RunMode mode = RunMode::simulate;
    bool emit_trajectories = false;
    unsigned jobs = 1;
    std::size_t state_limit = 5'000'000;
};

/// Paths of everything a run wrote.
struct OutputBundle {
    std::string scenario_hash;
    std::filesystem::path metadata;
    std::optional<std::filesystem::path> summary;
    std::optional<std::filesystem::path> curves;
    std::optional<std::filesystem::path> analytic;
    std::vector<std::filesystem::path> trajectories;
};

/// Stationary analysis of a scenario's model next to the simulated pre-injection window.
struct AnalyticRow {
    std::string quantity;
    std::string subject;
    double analytic = 0.0;
    std::optional<double> simulated;
};

std::vector<AnalyticRow> analytic_report(const Scenario& scenario, std::size_t state_limit,
                                         const std::vector<TrajectoryRecord>* simulated = nullptr);

/// CSV writers. Numbers use the shortest round-trip representation; absent values are
/// empty fields. The last column of every row is the scenario hash.
std::string summary_csv(const std::vector<ReplicationSummary>& reps, const ExperimentSummary& agg,
                        const std::string& hash);
std::string curves_csv(const ExperimentSummary& agg, const std::string& hash);
std::string trajectory_csv(const TrajectoryRecord& trajectory, const LossModel& model, const std::string& hash);
std::string analytic_csv(const std::vector<AnalyticRow>& rows, const std::string& hash);

/// Runs the scenario and writes the bundle into `out_dir` (created if needed).
OutputBundle run(const Scenario& scenario, const RunOptions& options, const std::filesystem::path& out_dir);

} // namespace slicing

#include "slicing/bundle.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "slicing/analytic.hpp"
#include "slicing/error.hpp"
#include "slicing/scenario_io.hpp"

namespace slicing {

RunMode parse_run_mode(const std::string& s) {
    if (s == "simulate") return RunMode::simulate;
    if (s == "analytic") return RunMode::analytic;
    if (s == "both") return RunMode::both;
    throw ValidationError("mode must be simulate, analytic or both");
}

namespace {

std::string num(double v) {
    if (std::isnan(v)) return {};
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string{}; }

std::string num(long long v) { return std::to_string(v); }

void write_file(const std::filesystem::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + p.string());
    out << body;
}

// Per-class arrival statistics and time averages over [0, until).
struct WindowStats {
    std::vector<long long> offered, rejected;
    std::vector<double> session_area;
    double block_area = 0.0;
    double length = 0.0;
};

WindowStats window_stats(const TrajectoryRecord& tr, const LossModel& model, double until) {
    WindowStats w;
    w.offered.assign(model.classes.size(), 0);
    w.rejected.assign(model.classes.size(), 0);
    w.session_area.assign(model.dims.size(), 0.0);
    const double end = std::min(until, tr.end_ms());
    w.length = end;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const auto& e = tr.event(i);
        if (e.t_ms >= end) break;
        if (i > 0 && is_arrival(e.kind) && !e.injected) {
            ++w.offered[static_cast<std::size_t>(e.cls)];
            if (e.kind == EventKind::arrival_rejected) ++w.rejected[static_cast<std::size_t>(e.cls)];
        }
        const double to = std::min(end, i + 1 < tr.size() ? tr.event(i + 1).t_ms : tr.end_ms());
        const double dt = to - e.t_ms;
        if (dt <= 0.0) continue;
        auto c = tr.counts(i);
        int blocks = 0;
        for (std::size_t d = 0; d < c.size(); ++d) {
            w.session_area[d] += c[d] * dt;
            blocks += c[d] * model.dims[d].demand_blocks;
        }
        w.block_area += blocks * dt;
    }
    return w;
}

std::string metadata_json(const Scenario& sc, const std::string& hash, const RunOptions& opt) {
    nlohmann::ordered_json j;
    j["scenario_hash"] = hash;
    j["label"] = sc.label;
    j["description"] = sc.description;
    j["figure"] = sc.figure;
    j["base_seed"] = sc.base_seed;
    j["replications"] = sc.replications;
    j["mode"] = opt.mode == RunMode::simulate ? "simulate" : opt.mode == RunMode::analytic ? "analytic" : "both";
    j["injection_mode"] = sc.injection ? std::string(to_string(sc.injection->mode)) : std::string("none");
    j["code_version"] = SLICING_VERSION;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["generated_at"] = stamp;
    j["scenario"] = scenario_to_json(sc);
    return j.dump(2) + "\n";
}

} // namespace

std::vector<AnalyticRow> analytic_report(const Scenario& sc, std::size_t state_limit,
                                         const std::vector<TrajectoryRecord>* simulated) {
    const auto model = sc.model();
    const auto chain = build_generator<double>(model, state_limit);
    SteadyStateOptions opts;
    if (sc.initial_counts) opts.start = static_cast<Eigen::Index>(chain.space.index_of(SystemState(*sc.initial_counts)));
    const auto pi = steady_state(chain.generator, opts);
    const auto blocking = stationary_blocking(chain.space, pi, model);
    const auto mean = mean_sessions(chain.space, pi);
    const auto occ = occupancy_distribution(chain.space, pi, model);
    double util = 0.0;
    for (Eigen::Index c = 0; c < occ.size(); ++c) util += static_cast<double>(c) * occ(c);
    util /= model.capacity;

    std::optional<std::vector<WindowStats>> windows;
    if (simulated && !simulated->empty()) {
        const double until = sc.injection ? sc.injection->t_inject_ms : sc.horizon_ms;
        windows.emplace();
        for (const auto& tr : *simulated) windows->push_back(window_stats(tr, model, until));
    }
    auto sim_blocking = [&](std::size_t c) -> std::optional<double> {
        if (!windows) return std::nullopt;
        long long off = 0, rej = 0;
        for (const auto& w : *windows) {
            off += w.offered[c];
            rej += w.rejected[c];
        }
        if (off == 0) return std::nullopt;
        return static_cast<double>(rej) / static_cast<double>(off);
    };
    auto sim_mean = [&](std::size_t d) -> std::optional<double> {
        if (!windows) return std::nullopt;
        double area = 0.0, len = 0.0;
        for (const auto& w : *windows) {
            area += w.session_area[d];
            len += w.length;
        }
        if (len <= 0.0) return std::nullopt;
        return area / len;
    };
    auto sim_util = [&]() -> std::optional<double> {
        if (!windows) return std::nullopt;
        double area = 0.0, len = 0.0;
        for (const auto& w : *windows) {
            area += w.block_area;
            len += w.length;
        }
        if (len <= 0.0) return std::nullopt;
        return area / (len * model.capacity);
    };

    std::vector<AnalyticRow> rows;
    rows.push_back({"states", "all", static_cast<double>(chain.space.size()), std::nullopt});
    for (std::size_t c = 0; c < model.classes.size(); ++c)
        rows.push_back({"blocking", model.classes[c].name, blocking[c], sim_blocking(c)});
    if (model.policy == Policy::nc1) {
        bool caps_bind = false;
        for (const auto& c : model.classes) caps_bind |= c.max_sessions < model.capacity / c.demand_blocks;
        if (!caps_bind) {
            const auto kr = kaufman_roberts(model.classes, model.capacity);
            for (std::size_t c = 0; c < model.classes.size(); ++c)
                rows.push_back({"kaufman_roberts_blocking", model.classes[c].name, kr.blocking[c], sim_blocking(c)});
        }
    }
    for (std::size_t d = 0; d < model.dims.size(); ++d)
        rows.push_back({"mean_sessions", model.dims[d].name, mean[d], sim_mean(d)});
    rows.push_back({"utilization", "all", util, sim_util()});
    return rows;
}

std::string summary_csv(const std::vector<ReplicationSummary>& reps, const ExperimentSummary& agg,
                        const std::string& hash) {
    std::ostringstream os;
    os << "replication,seed,rho_avg,burst_period_ms,burst_duration_ms,r_rj,r_dw,r_dc,r_v,n_ga,"
          "n_ga_post,r_rj_post,r_dw_post,r_dc_post,scenario_hash\n";
    for (std::size_t r = 0; r < reps.size(); ++r) {
        const auto& s = reps[r];
        os << r << ',' << s.seed << ',' << num(s.rho_avg) << ',' << num(s.burst.period_ms) << ','
           << num(s.burst.duration_ms) << ',' << num(s.whole.r_rj) << ',' << num(s.whole.r_dw) << ','
           << num(s.whole.r_dc) << ',' << num(s.whole.r_v) << ',' << num(s.whole.video.arrivals) << ','
           << num(s.post_injection.video.arrivals) << ',' << num(s.post_injection.r_rj) << ','
           << num(s.post_injection.r_dw) << ',' << num(s.post_injection.r_dc) << ',' << hash << '\n';
    }
    auto row = [&](const char* name, double Moments::*field) {
        os << name << ",," << num(agg.rho_avg.*field) << ',' << num(agg.burst_period_ms.*field) << ','
           << num(agg.burst_duration_ms.*field) << ',' << num(agg.r_rj.*field) << ',' << num(agg.r_dw.*field) << ','
           << num(agg.r_dc.*field) << ',' << num(agg.r_v.*field) << ',' << num(agg.n_ga.*field) << ','
           << num(agg.n_ga_post.*field) << ',' << num(agg.r_rj_post.*field) << ',' << num(agg.r_dw_post.*field)
           << ',' << num(agg.r_dc_post.*field) << ',' << hash << '\n';
    };
    row("mean", &Moments::mean);
    row("var", &Moments::variance);
    return os.str();
}

std::string curves_csv(const ExperimentSummary& agg, const std::string& hash) {
    std::ostringstream os;
    const auto dims = agg.mean_sessions.size();
    os << "t_ms";
    for (std::size_t d = 0; d < dims; ++d) os << ",mean_m_" << d + 1;
    for (std::size_t d = 0; d < dims; ++d) os << ",var_m_" << d + 1;
    os << ",mean_rho,scenario_hash\n";
    for (std::size_t k = 0; k < agg.grid_ms.size(); ++k) {
        os << num(agg.grid_ms[k]);
        for (std::size_t d = 0; d < dims; ++d) os << ',' << num(agg.mean_sessions[d][k]);
        for (std::size_t d = 0; d < dims; ++d) os << ',' << num(agg.var_sessions[d][k]);
        os << ',' << num(agg.mean_rho[k]) << ',' << hash << '\n';
    }
    return os.str();
}

std::string trajectory_csv(const TrajectoryRecord& tr, const LossModel& model, const std::string& hash) {
    std::ostringstream os;
    os << "t_ms";
    for (std::size_t d = 0; d < tr.dimension_count(); ++d) os << ",m_" << d + 1;
    os << ",occupied_blocks,rho,event_kind,n_downgraded,n_discarded,scenario_hash\n";
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const auto& e = tr.event(i);
        auto c = tr.counts(i);
        int blocks = 0;
        os << num(e.t_ms);
        for (std::size_t d = 0; d < c.size(); ++d) {
            os << ',' << c[d];
            blocks += c[d] * model.dims[d].demand_blocks;
        }
        os << ',' << blocks << ',' << num(static_cast<double>(blocks) / model.capacity) << ',' << to_string(e.kind)
           << ',' << e.downgraded << ',' << e.discarded << ',' << hash << '\n';
    }
    return os.str();
}

std::string analytic_csv(const std::vector<AnalyticRow>& rows, const std::string& hash) {
    std::ostringstream os;
    os << "quantity,subject,analytic,simulated,abs_diff,scenario_hash\n";
    for (const auto& r : rows) {
        os << r.quantity << ',' << r.subject << ',' << num(r.analytic) << ',' << num(r.simulated) << ',';
        if (r.simulated) os << num(std::abs(*r.simulated - r.analytic));
        os << ',' << hash << '\n';
    }
    return os.str();
}

OutputBundle run(const Scenario& scenario, const RunOptions& options, const std::filesystem::path& out_dir) {
    scenario.validate();
    std::filesystem::create_directories(out_dir);

    OutputBundle bundle;
    bundle.scenario_hash = scenario_hash(scenario);
    const auto& hash = bundle.scenario_hash;
    const auto model = scenario.model();

    std::vector<TrajectoryRecord> trajectories;
    if (options.mode != RunMode::analytic) {
        trajectories = run_experiment(scenario, options.jobs);
        std::vector<ReplicationSummary> reps;
        reps.reserve(trajectories.size());
        for (const auto& tr : trajectories) reps.push_back(summarize(tr, scenario));
        const auto agg = aggregate(reps);

        bundle.summary = out_dir / "summary.csv";
        write_file(*bundle.summary, summary_csv(reps, agg, hash));
        bundle.curves = out_dir / "curves.csv";
        write_file(*bundle.curves, curves_csv(agg, hash));

        if (options.emit_trajectories) {
            const auto dir = out_dir / "trajectories";
            std::filesystem::create_directories(dir);
            for (std::size_t r = 0; r < trajectories.size(); ++r) {
                char name[32];
                std::snprintf(name, sizeof name, "trajectory_%03zu.csv", r);
                bundle.trajectories.push_back(dir / name);
                write_file(bundle.trajectories.back(), trajectory_csv(trajectories[r], model, hash));
            }
        }
    }

    if (options.mode != RunMode::simulate) {
        const auto rows = analytic_report(scenario, options.state_limit,
                                          options.mode == RunMode::both ? &trajectories : nullptr);
        bundle.analytic = out_dir / "analytic.csv";
        write_file(*bundle.analytic, analytic_csv(rows, hash));
    }

    bundle.metadata = out_dir / "metadata.json";
    write_file(bundle.metadata, metadata_json(scenario, hash, options));
    return bundle;
}

} // namespace slicing

// Command-line front end: load a scenario, run it, write the CSV bundle.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "slicing/bundle.hpp"
#include "slicing/error.hpp"
#include "slicing/scenario_io.hpp"

namespace {

enum ExitCode { ok = 0, failure = 1, validation = 2, numerical = 3, state_cap = 4 };

int report(const std::filesystem::path& out_dir, const char* kind, int code, const std::string& message) {
    nlohmann::ordered_json err{{"status", "error"}, {"kind", kind}, {"exit_code", code}, {"message", message}};
    std::cerr << err.dump() << "\n";
    if (!out_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (!ec) std::ofstream(out_dir / "error.json") << err.dump(2) << "\n";
    }
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transient simulator and analytic solver for multi-class RAN slicing loss models"};

    std::string scenario_path;
    std::string mode = "simulate";
    std::optional<int> replications;
    std::optional<std::uint64_t> seed;
    std::optional<double> grid_ms;
    std::string out = "out";
    bool emit_trajectories = false;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::size_t state_limit = slicing::RunOptions{}.state_limit;

    app.add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    app.add_option("--mode", mode, "simulate | analytic | both")->check(CLI::IsMember({"simulate", "analytic", "both"}));
    app.add_option("--replications", replications, "Override the replication count");
    app.add_option("--seed", seed, "Override the base seed");
    app.add_option("--out", out, "Output directory");
    app.add_option("--grid-ms", grid_ms, "Reporting grid step in ms");
    app.add_flag("--emit-trajectories", emit_trajectories, "Write one event CSV per replication");
    app.add_option("--jobs", jobs, "Worker threads for replications");
    app.add_option("--state-limit", state_limit, "Largest state space the analytic solver may build");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : ExitCode::validation;
    }

    const std::filesystem::path out_dir(out);
    try {
        auto scenario = slicing::load_scenario(scenario_path);
        if (replications) scenario.replications = *replications;
        if (seed) scenario.base_seed = *seed;
        if (grid_ms) scenario.grid_ms = *grid_ms;
        scenario.validate();

        slicing::RunOptions opts;
        opts.mode = slicing::parse_run_mode(mode);
        opts.emit_trajectories = emit_trajectories;
        opts.jobs = jobs;
        opts.state_limit = state_limit;
        const auto bundle = slicing::run(scenario, opts, out_dir);

        nlohmann::ordered_json done{{"status", "ok"}, {"scenario_hash", bundle.scenario_hash},
                                    {"out", out_dir.string()}};
        std::cout << done.dump() << "\n";
        return ExitCode::ok;
    } catch (const slicing::ValidationError& e) {
        return report(out_dir, "validation", ExitCode::validation, e.what());
    } catch (const slicing::InvalidArgument& e) {
        return report(out_dir, "validation", ExitCode::validation, e.what());
    } catch (const slicing::InfeasibleAllocation& e) {
        return report(out_dir, "validation", ExitCode::validation, e.what());
    } catch (const slicing::NumericalFailure& e) {
        return report(out_dir, "numerical", ExitCode::numerical, e.what());
    } catch (const slicing::StateSpaceTooLarge& e) {
        return report(out_dir, "state_space", ExitCode::state_cap, e.what());
    } catch (const std::exception& e) {
        return report(out_dir, "failure", ExitCode::failure, e.what());
    }
}

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "slicing/analytic.hpp"
#include "slicing/bundle.hpp"
#include "slicing/error.hpp"
#include "slicing/scenario_io.hpp"

using namespace slicing;
namespace fs = std::filesystem;

namespace {

Scenario load(const char* name) { return load_scenario(std::string(SCENARIO_DIR) + "/" + name + ".json"); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

fs::path scratch(const char* name) {
    auto dir = fs::temp_directory_path() / "slicing_bundle_test" / name;
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("run modes") {
    CHECK(parse_run_mode("simulate") == RunMode::simulate);
    CHECK(parse_run_mode("analytic") == RunMode::analytic);
    CHECK(parse_run_mode("both") == RunMode::both);
    CHECK_THROWS_AS(parse_run_mode("fast"), ValidationError);
}

TEST_CASE("simulate writes summary and curves") {
    const auto sc = load("table2_nc3_lam20");
    RunOptions opt;
    opt.emit_trajectories = true;
    const auto dir = scratch("simulate");
    const auto b = run(sc, opt, dir);

    REQUIRE(b.summary);
    const auto summary = lines(slurp(*b.summary));
    REQUIRE(summary.size() == 1 + 30 + 2);
    CHECK(summary[0] ==
          "replication,seed,rho_avg,burst_period_ms,burst_duration_ms,r_rj,r_dw,r_dc,r_v,n_ga,"
          "n_ga_post,r_rj_post,r_dw_post,r_dc_post,scenario_hash");
    CHECK(summary[31].rfind("mean,,", 0) == 0);
    CHECK(summary[32].rfind("var,,", 0) == 0);
    for (std::size_t i = 1; i < summary.size(); ++i)
        CHECK(summary[i].substr(summary[i].size() - b.scenario_hash.size()) == b.scenario_hash);

    const auto curves = lines(slurp(*b.curves));
    CHECK(curves[0] == "t_ms,mean_m_1,mean_m_2,mean_m_3,var_m_1,var_m_2,var_m_3,mean_rho,scenario_hash");
    CHECK(curves.size() == 1 + 601);

    REQUIRE(b.trajectories.size() == 30);
    const auto traj = lines(slurp(b.trajectories[0]));
    CHECK(traj[0] == "t_ms,m_1,m_2,m_3,occupied_blocks,rho,event_kind,n_downgraded,n_discarded,scenario_hash");
    CHECK(traj[1].rfind("0,0,0,0,0,0,initial,", 0) == 0);

    CHECK(fs::exists(b.metadata));
    CHECK_FALSE(b.analytic);
}

TEST_CASE("analytic report on the small NC1 instance matches Kaufman-Roberts") {
    const auto sc = load("oracle_nc1_small");
    const auto rows = analytic_report(sc, default_state_limit);
    const auto kr = kaufman_roberts(sc.model().classes, sc.model().capacity);
    int matched = 0;
    for (const auto& r : rows) {
        if (r.quantity == "states") CHECK(r.analytic == 36.0);
        if (r.quantity != "blocking") continue;
        const std::size_t c = r.subject == "narrow" ? 0 : 1;
        CHECK(r.analytic == doctest::Approx(kr.blocking[c]).epsilon(1e-8));
        CHECK_FALSE(r.simulated);
        ++matched;
    }
    CHECK(matched == 2);
}

TEST_CASE("both mode fills the comparison columns") {
    auto sc = load("oracle_nc1_small");
    sc.replications = 2;
    RunOptions opt;
    opt.mode = RunMode::both;
    const auto b = run(sc, opt, scratch("both"));
    REQUIRE(b.analytic);
    const auto rows = lines(slurp(*b.analytic));
    CHECK(rows[0] == "quantity,subject,analytic,simulated,abs_diff,scenario_hash");
    bool compared = false;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].rfind("blocking,", 0) == 0) compared = rows[i].find(",," ) == std::string::npos;
    CHECK(compared);
}

TEST_CASE("state cap is reported") {
    const auto sc = load("table2_nc3_lam20");
    RunOptions opt;
    opt.mode = RunMode::analytic;
    opt.state_limit = 10;
    CHECK_THROWS_AS(run(sc, opt, scratch("cap")), StateSpaceTooLarge);
}

TEST_CASE("identical inputs give identical CSV bodies") {
    auto sc = load("table2_nc2_lam10");
    sc.replications = 8;
    RunOptions serial, parallel;
    parallel.jobs = 4;
    const auto a = run(sc, serial, scratch("det_a"));
    const auto b = run(sc, parallel, scratch("det_b"));
    CHECK(slurp(*a.summary) == slurp(*b.summary));
    CHECK(slurp(*a.curves) == slurp(*b.curves));
}

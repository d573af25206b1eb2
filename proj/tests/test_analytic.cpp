#include <doctest.h>

#include <cmath>

#include "slicing/analytic.hpp"
#include "support/fixtures.hpp"

using namespace slicing;
using fixtures::erlang_b;

namespace {

TrafficClass plain(const char* name, double lambda, double mu, int demand, int cap) {
    return {name, lambda, mu, demand, cap, Priority::none, false, 0, std::nullopt};
}

LossModel small_nc1() { return make_model(Policy::nc1, {plain("a", 2, 1, 1, 10), plain("b", 3, 1, 2, 5)}, 10); }

} // namespace

TEST_CASE("Kaufman-Roberts single class reproduces Erlang B") {
    const OfferedClass one[] = {{1.0, 1}};
    CHECK(kaufman_roberts<double>(one, 2).blocking[0] == doctest::Approx(0.2).epsilon(1e-14));

    const auto b30 = kaufman_roberts({plain("v", 1.0 / 20, 1.0 / 600, 1, 31)}, 31).blocking[0];
    CHECK(b30 == doctest::Approx(0.1136).epsilon(1e-3));
    CHECK(std::abs(b30 - 0.11) <= 0.02);
    CHECK(kaufman_roberts({plain("v", 1.0 / 40, 1.0 / 600, 1, 31)}, 31).blocking[0] < 0.005);

    for (int c = 1; c <= 100; c += 3) {
        for (double a : {0.1, 1.0, 7.5, 30.0, 64.0, 100.0}) {
            const OfferedClass k[] = {{a, 1}};
            REQUIRE(kaufman_roberts<double>(k, c).blocking[0] == doctest::Approx(erlang_b(c, a)).epsilon(1e-12));
        }
    }
}

TEST_CASE("Kaufman-Roberts preconditions") {
    const OfferedClass k[] = {{1.0, 1}};
    CHECK_THROWS_AS(kaufman_roberts<double>(k, 0), InvalidArgument);

    auto g = plain("g", 1, 1, 1, 10);
    g.priority = Priority::high;
    CHECK_THROWS_AS(kaufman_roberts({g}, 10), InvalidArgument);
    CHECK_THROWS_AS(kaufman_roberts({plain("a", 1, 1, 2, 3)}, 10), InvalidArgument);
}

TEST_CASE("Kaufman-Roberts stays finite for heavy loads") {
    const OfferedClass k[] = {{900.0, 1}, {400.0, 3}};
    const auto d = kaufman_roberts<double>(k, 600);
    CHECK(d.q.allFinite());
    CHECK(d.q.sum() == doctest::Approx(1.0));
    CHECK(d.blocking[1] >= d.blocking[0]);
}

TEST_CASE("generator of M/M/2/2") {
    const auto m = make_model(Policy::nc1, {plain("a", 1.5, 0.5, 1, 2)}, 2);
    const auto chain = build_generator(m);
    REQUIRE(chain.space.size() == 3);
    Eigen::MatrixXd q(chain.generator);
    Eigen::MatrixXd expected(3, 3);
    expected << -1.5, 1.5, 0.0, 0.5, -2.0, 1.5, 0.0, 1.0, -1.0;
    CHECK((q - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("state space indexing and counting") {
    const auto m = fixtures::reference_model(Policy::nc3);
    const StateSpace space(m);
    const auto all = fixtures::enumerate_states(m);
    CHECK(space.size() == all.size());
    CHECK(count_feasible_states(m) == all.size());
    CHECK(space[0] == m.empty_state());
    for (std::size_t i = 0; i < space.size(); ++i) {
        REQUIRE(space[i] == all[i]);
        REQUIRE(space.index_of(space[i]) == i);
        REQUIRE(occupied(space[i], m) <= 62);
    }
    CHECK_FALSE(space.find({0, 32, 0}).has_value());
    CHECK_THROWS_AS(StateSpace(m, 100), StateSpaceTooLarge);
}

TEST_CASE("generator rows sum to zero and hold the preemption arc") {
    const auto m = fixtures::reference_model(Policy::nc2, 1.0 / 10, 0.7);
    const auto chain = build_generator(m);
    const Eigen::VectorXd rowsum = chain.generator * Eigen::VectorXd::Ones(chain.generator.cols());
    CHECK(rowsum.cwiseAbs().maxCoeff() < 1e-12);

    const auto from = chain.space.index_of({0, 31});
    const auto to = chain.space.index_of({1, 30});
    CHECK(chain.generator.coeff(from, to) == doctest::Approx(0.7));

    for (int k = 0; k < chain.generator.outerSize(); ++k)
        for (SparseGenerator<double>::InnerIterator it(chain.generator, k); it; ++it)
            if (it.row() != it.col()) REQUIRE(it.value() >= 0.0);
}

TEST_CASE("steady state of small chains") {
    auto m = make_model(Policy::nc1, {plain("a", 1, 1, 1, 1)}, 1);
    auto pi = steady_state(build_generator(m).generator);
    CHECK(pi(0) == doctest::Approx(0.5));
    CHECK(pi(1) == doctest::Approx(0.5));

    m = make_model(Policy::nc1, {plain("a", 1, 1, 1, 2)}, 2);
    pi = steady_state(build_generator(m).generator);
    CHECK(pi(0) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(pi(1) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(pi(2) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("NC1 steady state aggregates to the Kaufman-Roberts occupancy") {
    const auto m = small_nc1();
    const auto chain = build_generator(m);
    const auto pi = steady_state(chain.generator);
    CHECK(balance_residual(chain.generator, pi) < 1e-10);
    const auto occ = occupancy_distribution(chain.space, pi, m);
    const auto kr = kaufman_roberts(m.classes, m.capacity);
    CHECK((occ - kr.q).cwiseAbs().maxCoeff() < 1e-8);

    const auto blocking = stationary_blocking(chain.space, pi, m);
    CHECK(blocking[0] == doctest::Approx(kr.blocking[0]).epsilon(1e-8));
    CHECK(blocking[1] == doctest::Approx(kr.blocking[1]).epsilon(1e-8));
}

TEST_CASE("steady state of the reference NC3 chain") {
    const auto m = fixtures::reference_model(Policy::nc3, 1.0 / 20, 1.0);
    const auto chain = build_generator(m);
    const auto pi = steady_state(chain.generator);
    CHECK(pi.sum() == doctest::Approx(1.0));
    CHECK(pi.minCoeff() >= 0.0);
    CHECK(balance_residual(chain.generator, pi) < 1e-10);
}

TEST_CASE("transient identities") {
    const auto m = make_model(Policy::nc1, {plain("a", 0.0, 0.8, 1, 1)}, 1);
    const auto chain = build_generator(m);
    Eigen::VectorXd pi0(2);
    pi0 << 0.0, 1.0;
    CHECK((transient(chain.generator, pi0, 0.0) - pi0).norm() == 0.0);
    for (double t : {0.1, 1.0, 4.0}) {
        const auto p = transient(chain.generator, pi0, t);
        CHECK(p(0) == doctest::Approx(1.0 - std::exp(-0.8 * t)).epsilon(1e-9));
    }
}

TEST_CASE("two-state chain against the closed form") {
    const double lambda = 1.3, mu = 0.4;
    const auto m = make_model(Policy::nc1, {plain("a", lambda, mu, 1, 1)}, 1);
    const auto chain = build_generator(m);
    Eigen::VectorXd pi0(2);
    pi0 << 1.0, 0.0;
    const double t = 1.0 / lambda;
    const auto p = transient(chain.generator, pi0, t);
    const double busy = lambda / (lambda + mu) * (1.0 - std::exp(-(lambda + mu) * t));
    CHECK(std::abs(p(1) - busy) < 1e-8);
    CHECK(std::abs(p(0) - (1.0 - busy)) < 1e-8);
}

TEST_CASE("transient converges to the steady state") {
    const auto m = small_nc1();
    const auto chain = build_generator(m);
    const auto pi = steady_state(chain.generator);
    Eigen::VectorXd pi0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(chain.space.size()));
    pi0(0) = 1.0;
    for (double t : {0.05, 0.3, 2.0}) {
        const auto p = transient(chain.generator, pi0, t);
        CHECK(p.minCoeff() >= -1e-15);
        CHECK(std::abs(p.sum() - 1.0) <= 1e-9);
    }
    const auto late = transient(chain.generator, pi0, 50.0 / 1.0);
    CHECK((late - pi).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("mean sessions match Little's law for NC1") {
    const auto m = small_nc1();
    const auto chain = build_generator(m);
    const auto pi = steady_state(chain.generator);
    const auto mean = mean_sessions(chain.space, pi);
    const auto blocking = stationary_blocking(chain.space, pi, m);
    CHECK(mean[0] == doctest::Approx(2.0 * (1.0 - blocking[0])).epsilon(1e-10));
    CHECK(mean[1] == doctest::Approx(3.0 * (1.0 - blocking[1])).epsilon(1e-10));
}

#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "slicing/error.hpp"
#include "slicing/traffic_model.hpp"

namespace slicing {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using SparseGenerator = Eigen::SparseMatrix<Scalar>;

inline constexpr std::size_t default_state_limit = 5'000'000;

/// Feasible states of a model, densely indexed in lexicographic order. Index 0 is the
/// empty system.
class StateSpace {
public:
    StateSpace() = default;
    explicit StateSpace(const LossModel& model, std::size_t limit = default_state_limit);

    std::size_t size() const { return states_.size(); }
    const SystemState& operator[](std::size_t i) const { return states_[i]; }
    const std::vector<SystemState>& states() const { return states_; }

    std::optional<std::size_t> find(const SystemState& s) const;
    std::size_t index_of(const SystemState& s) const;

private:
    std::uint64_t key(const SystemState& s) const;

    std::vector<SystemState> states_;
    std::vector<std::uint64_t> radix_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// Number of feasible states, counted without materialising them.
std::size_t count_feasible_states(const LossModel& model);

template <typename Scalar = double>
struct Chain {
    StateSpace space;
    SparseGenerator<Scalar> generator;
};

/// Materialises the CTMC of a model. Rejected arrivals are self-loops and do not appear.
template <typename Scalar = double>
Chain<Scalar> build_generator(const LossModel& model, std::size_t limit = default_state_limit) {
    Chain<Scalar> chain{StateSpace(model, limit), {}};
    const auto n = static_cast<Eigen::Index>(chain.space.size());

    std::vector<Eigen::Triplet<Scalar>> entries;
    entries.reserve(chain.space.size() * (model.classes.size() + model.dims.size() + 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = chain.space[static_cast<std::size_t>(i)];
        Scalar out = 0;
        for (const auto& tr : transitions(s, model)) {
            if (tr.target == s) continue;
            const auto j = static_cast<Eigen::Index>(chain.space.index_of(tr.target));
            entries.emplace_back(i, j, static_cast<Scalar>(tr.rate));
            out += static_cast<Scalar>(tr.rate);
        }
        entries.emplace_back(i, i, -out);
    }
    chain.generator.resize(n, n);
    chain.generator.setFromTriplets(entries.begin(), entries.end());
    chain.generator.makeCompressed();
    return chain;
}

/// Largest |pi Q| entry.
template <typename Scalar>
Scalar balance_residual(const SparseGenerator<Scalar>& q, const VectorX<Scalar>& pi) {
    VectorX<Scalar> r = q.transpose() * pi;
    return r.size() ? r.cwiseAbs().maxCoeff() : Scalar(0);
}

/// Indices reachable from `start` following positive off-diagonal rates.
template <typename Scalar>
std::vector<Eigen::Index> reachable_from(const SparseGenerator<Scalar>& q, Eigen::Index start) {
    const Eigen::SparseMatrix<Scalar, Eigen::RowMajor> rows = q;
    std::vector<char> seen(static_cast<std::size_t>(q.rows()), 0);
    std::vector<Eigen::Index> order;
    std::deque<Eigen::Index> frontier{start};
    seen[static_cast<std::size_t>(start)] = 1;
    while (!frontier.empty()) {
        const auto i = frontier.front();
        frontier.pop_front();
        order.push_back(i);
        for (typename decltype(rows)::InnerIterator it(rows, i); it; ++it) {
            const auto j = it.col();
            if (j == i || it.value() <= Scalar(0) || seen[static_cast<std::size_t>(j)]) continue;
            seen[static_cast<std::size_t>(j)] = 1;
            frontier.push_back(j);
        }
    }
    std::sort(order.begin(), order.end());
    return order;
}

struct SteadyStateOptions {
    double tolerance = 1e-10;
    int max_refinements = 5;
    Eigen::Index start = 0; // the solve is restricted to states reachable from here
};

/// Stationary distribution of the component reachable from `opts.start`; other states get
/// zero mass. One balance equation is replaced by the normalisation row and the system is
/// solved by sparse LU with iterative refinement.
template <typename Scalar>
VectorX<Scalar> steady_state(const SparseGenerator<Scalar>& q, const SteadyStateOptions& opts = {}) {
    const auto n = q.rows();
    if (n == 0 || q.cols() != n) throw InvalidArgument("generator must be square and non-empty");
    if (opts.start < 0 || opts.start >= n) throw InvalidArgument("start state outside the generator");

    const auto reach = reachable_from(q, opts.start);
    const auto m = static_cast<Eigen::Index>(reach.size());
    std::vector<Eigen::Index> local(static_cast<std::size_t>(n), -1);
    for (Eigen::Index k = 0; k < m; ++k) local[static_cast<std::size_t>(reach[static_cast<std::size_t>(k)])] = k;

    // A = Q_r^T with its last row replaced by ones, b = e_last.
    std::vector<Eigen::Triplet<Scalar>> entries;
    entries.reserve(static_cast<std::size_t>(q.nonZeros() + m));
    for (Eigen::Index col = 0; col < n; ++col) {
        const auto lc = local[static_cast<std::size_t>(col)];
        if (lc < 0) continue;
        for (typename SparseGenerator<Scalar>::InnerIterator it(q, col); it; ++it) {
            const auto lr = local[static_cast<std::size_t>(it.row())];
            if (lr < 0 || lc == m - 1) continue;
            entries.emplace_back(lc, lr, it.value());
        }
    }
    for (Eigen::Index k = 0; k < m; ++k) entries.emplace_back(m - 1, k, Scalar(1));
    SparseGenerator<Scalar> a(m, m);
    a.setFromTriplets(entries.begin(), entries.end());
    a.makeCompressed();

    VectorX<Scalar> b = VectorX<Scalar>::Zero(m);
    b(m - 1) = Scalar(1);

    Eigen::SparseLU<SparseGenerator<Scalar>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success)
        throw NumericalFailure("steady-state factorisation failed: " + lu.lastErrorMessage(),
                               std::numeric_limits<double>::infinity());

    VectorX<Scalar> x = lu.solve(b);
    for (int k = 0; k < opts.max_refinements; ++k) {
        VectorX<Scalar> r = b - a * x;
        if (r.cwiseAbs().maxCoeff() <= Scalar(opts.tolerance) * Scalar(1e-3)) break;
        x += lu.solve(r);
    }

    VectorX<Scalar> pi = VectorX<Scalar>::Zero(n);
    for (Eigen::Index k = 0; k < m; ++k) pi(reach[static_cast<std::size_t>(k)]) = std::max(x(k), Scalar(0));
    const Scalar total = pi.sum();
    if (!(total > Scalar(0))) throw NumericalFailure("steady-state solution has no mass", 0.0);
    pi /= total;

    const Scalar res = balance_residual(q, pi);
    if (!(res <= Scalar(opts.tolerance)))
        throw NumericalFailure("steady-state residual above tolerance", static_cast<double>(res));
    return pi;
}

/// Transient distribution pi0 * exp(Q t) by uniformisation. Poisson weights are computed in
/// log space and the series stops once the accumulated weight reaches 1 - epsilon, so the
/// returned vector is short of unit mass by at most epsilon.
template <typename Scalar>
VectorX<Scalar> transient(const SparseGenerator<Scalar>& q, const VectorX<Scalar>& pi0, Scalar t,
                          Scalar epsilon = Scalar(1e-9)) {
    using std::exp;
    using std::log;
    if (q.rows() != q.cols() || pi0.size() != q.rows()) throw InvalidArgument("dimension mismatch");
    if (t < Scalar(0)) throw InvalidArgument("time must be non-negative");

    Scalar uniform_rate = 0;
    for (Eigen::Index i = 0; i < q.rows(); ++i) uniform_rate = std::max(uniform_rate, -q.coeff(i, i));
    if (t == Scalar(0) || uniform_rate == Scalar(0)) return pi0;

    const SparseGenerator<Scalar> qt = q.transpose();
    const Scalar qtime = uniform_rate * t;
    const Scalar log_q = log(qtime);

    VectorX<Scalar> v = pi0;
    VectorX<Scalar> result = VectorX<Scalar>::Zero(pi0.size());
    Scalar accumulated = 0;
    for (long k = 0;; ++k) {
        const Scalar w = exp(-qtime + Scalar(k) * log_q - std::lgamma(static_cast<double>(k) + 1.0));
        result += w * v;
        accumulated += w;
        if (accumulated >= Scalar(1) - epsilon && Scalar(k) >= qtime) break;
        if (Scalar(k) > qtime + Scalar(50) * std::sqrt(qtime) + Scalar(1000)) break;
        v += (qt * v) / uniform_rate;
    }
    return result;
}

/// Offered load (erlangs) and per-session demand of one class.
struct OfferedClass {
    double load = 0.0;
    int demand_blocks = 1;
};

template <typename Scalar = double>
struct OccupancyDistribution {
    VectorX<Scalar> q;              // q(c), c = 0..C
    std::vector<Scalar> blocking;   // per class
};

/// Kaufman-Roberts recursion c q(c) = sum_i a_i d_i q(c - d_i), normalised over 0..C.
/// Class i is blocked in every occupancy c > C - d_i.
template <typename Scalar = double>
OccupancyDistribution<Scalar> kaufman_roberts(std::span<const OfferedClass> classes, int capacity) {
    if (capacity <= 0) throw InvalidArgument("capacity must be positive");
    for (const auto& c : classes) {
        if (c.demand_blocks < 1) throw InvalidArgument("demand must be at least one block");
        if (!(c.load >= 0.0) || !std::isfinite(c.load)) throw InvalidArgument("offered load must be finite and non-negative");
    }

    VectorX<Scalar> q = VectorX<Scalar>::Zero(capacity + 1);
    q(0) = Scalar(1);
    for (int c = 1; c <= capacity; ++c) {
        Scalar acc = 0;
        for (const auto& k : classes)
            if (c - k.demand_blocks >= 0) acc += Scalar(k.load) * Scalar(k.demand_blocks) * q(c - k.demand_blocks);
        q(c) = acc / Scalar(c);
        if (q(c) > Scalar(1e200)) q.head(c + 1) /= q(c);
    }
    q /= q.sum();

    OccupancyDistribution<Scalar> out;
    out.q = std::move(q);
    for (const auto& k : classes) {
        const int from = std::max(0, capacity - k.demand_blocks + 1);
        out.blocking.push_back(out.q.segment(from, capacity + 1 - from).sum());
    }
    return out;
}

/// Kaufman-Roberts over a non-priority class set. Session caps must not bind
/// (max_sessions * demand >= capacity), since the recursion ignores them.
OccupancyDistribution<double> kaufman_roberts(const std::vector<TrafficClass>& classes, int capacity);

/// Stationary probability mass per occupied-block count 0..C.
VectorX<double> occupancy_distribution(const StateSpace& space, const VectorX<double>& pi,
                                       const LossModel& model);

/// Per-class probability that an arrival is rejected, using the stationary distribution.
std::vector<double> stationary_blocking(const StateSpace& space, const VectorX<double>& pi,
                                        const LossModel& model);

/// Expected number of sessions per dimension.
std::vector<double> mean_sessions(const StateSpace& space, const VectorX<double>& pi);

} // namespace slicing

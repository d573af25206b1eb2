#include "slicing/numerology.hpp"

#include <algorithm>
#include <array>
#include <iterator>
#include <string>

#include "slicing/error.hpp"

namespace slicing {

namespace {

struct TableRow {
    double symbol_us;
    double cp_us;
};

constexpr std::array<TableRow, max_beta + 1> kTiming{{
    {71.43, 4.69},
    {35.71, 2.34},
    {17.86, 1.17},
    {8.92, 0.57},
    {4.46, 0.29},
}};

std::set<int> drop_lowest(std::set<int> s) {
    if (s.size() > 1) s.erase(s.begin());
    return s;
}

std::set<int> drop_highest(std::set<int> s) {
    if (s.size() > 1) s.erase(std::prev(s.end()));
    return s;
}

std::set<int> intersect(const std::set<int>& a, const std::set<int>& b) {
    std::set<int> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

} // namespace

Numerology lookup_numerology(int beta) {
    if (beta < 0 || beta > max_beta)
        throw InvalidArgument("numerology index " + std::to_string(beta) + " outside 0.." +
                              std::to_string(max_beta));
    Numerology n;
    n.beta = beta;
    n.scs_khz = 15 << beta;
    n.prb_khz = 12 * n.scs_khz;
    n.slots_per_subframe = 1 << beta;
    n.symbol_duration_us = kTiming[beta].symbol_us;
    n.cp_duration_us = kTiming[beta].cp_us;
    return n;
}

double guard_band_khz(int channel_bandwidth_khz, int scs_khz, int num_prbs) {
    if (num_prbs < 0 || scs_khz <= 0)
        throw InvalidArgument("PRB count and sub-carrier spacing must be non-negative");
    const long long occupied = 12LL * scs_khz * num_prbs;
    const long long spare = channel_bandwidth_khz - occupied;
    if (spare < 0)
        throw InfeasibleAllocation(std::to_string(num_prbs) + " PRBs of " + std::to_string(12 * scs_khz) +
                                   " kHz exceed the " + std::to_string(channel_bandwidth_khz) +
                                   " kHz channel");
    return static_cast<double>(spare) / 2.0;
}

RadioConfig usable_capacity(int channel_bandwidth_khz, const Numerology& numerology, int num_prbs,
                            int block_khz, int guard_period_overhead_khz) {
    if (block_khz <= 0) throw InvalidArgument("allocation block must be positive");
    if (guard_period_overhead_khz < 0) throw InvalidArgument("guard-period overhead must be non-negative");

    RadioConfig rc;
    rc.channel_bandwidth_khz = channel_bandwidth_khz;
    rc.block_khz = block_khz;
    rc.guard_band_khz = guard_band_khz(channel_bandwidth_khz, numerology.scs_khz, num_prbs);
    rc.guard_period_overhead_khz = guard_period_overhead_khz;
    rc.usable_capacity_khz = num_prbs * numerology.prb_khz - guard_period_overhead_khz;
    if (rc.usable_capacity_khz < 0)
        throw InfeasibleAllocation("guard-period overhead exceeds the allocated PRBs");
    if (rc.usable_capacity_khz % block_khz != 0)
        throw InvalidArgument("usable capacity " + std::to_string(rc.usable_capacity_khz) +
                              " kHz is not a multiple of the " + std::to_string(block_khz) +
                              " kHz allocation block");
    rc.capacity_blocks = rc.usable_capacity_khz / block_khz;
    return rc;
}

std::set<int> select_numerology(const SelectionContext& ctx) {
    const std::set<int> band = ctx.carrier_band == CarrierBand::sub6 ? std::set<int>{0, 1, 2}
                                                                     : std::set<int>{2, 3, 4};

    std::set<int> wide = band;
    if (ctx.latency_critical) wide = intersect(wide, drop_lowest(band));
    if (ctx.carrier_band == CarrierBand::mm_wave) wide = intersect(wide, drop_lowest(band));
    if (ctx.mobility == Mobility::high) wide = intersect(wide, drop_lowest(band));

    std::set<int> narrow = band;
    if (ctx.cell_size == CellSize::large) narrow = intersect(narrow, drop_highest(band));
    if (ctx.narrowband_device) narrow = intersect(narrow, {*band.begin()});

    auto both = intersect(wide, narrow);
    if (!both.empty()) return both;
    return wide;
}

} // namespace slicing

#pragma once

#include <set>

namespace slicing {

/// One row of the 5G NR numerology table.
struct Numerology {
    int beta = 0;
    int scs_khz = 15;
    int prb_khz = 180;
    int slots_per_subframe = 1;
    double symbol_duration_us = 71.43;
    double cp_duration_us = 4.69;
};

/// Capacity of a shared PRB pool, in kHz and in allocation blocks.
struct RadioConfig {
    int channel_bandwidth_khz = 0;
    int block_khz = 0;
    int usable_capacity_khz = 0;
    int capacity_blocks = 0;
    double guard_band_khz = 0.0;
    int guard_period_overhead_khz = 0;
};

enum class CarrierBand { sub6, mm_wave };
enum class CellSize { small, large };
enum class Mobility { low, high };

struct SelectionContext {
    bool latency_critical = false;
    CarrierBand carrier_band = CarrierBand::sub6;
    CellSize cell_size = CellSize::small;
    Mobility mobility = Mobility::low;
    bool narrowband_device = false;
};

inline constexpr int max_beta = 4;

/// Throws InvalidArgument for beta outside 0..4.
Numerology lookup_numerology(int beta);

/// Minimum guard band on each side of the carrier: (bandwidth - prbs * scs * 12) / 2.
/// Throws InfeasibleAllocation when the PRBs do not fit.
double guard_band_khz(int channel_bandwidth_khz, int scs_khz, int num_prbs);

/// Capacity left for allocation once the guard bands (and an optional guard-period
/// overhead) are removed, expressed in units of `block_khz`.
RadioConfig usable_capacity(int channel_bandwidth_khz, const Numerology& numerology, int num_prbs,
                            int block_khz, int guard_period_overhead_khz = 0);

/// Rule-based numerology recommendation.
///
/// The carrier band fixes the admissible rows (sub-6 GHz: 0..2, mmWave: 2..4). Each active
/// criterion then narrows that set: latency-critical traffic, mmWave phase noise and high
/// Doppler spread drop the narrowest spacing; a large cell drops the widest spacing; a
/// narrowband device keeps only the narrowest. The result is the intersection. When the
/// intersection is empty, only the criteria pulling towards wider spacing are applied.
std::set<int> select_numerology(const SelectionContext& ctx);

} // namespace slicing

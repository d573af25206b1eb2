#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace slicing {

/// SplitMix64 finaliser; used to derive independent seeds from (seed, index) pairs.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t deterministic_mix(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// One deterministic random stream. Draws use only the raw engine output so that
/// sequences do not depend on the standard library's distribution implementations.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

private:
    std::mt19937_64 engine_;
};

} // namespace slicing

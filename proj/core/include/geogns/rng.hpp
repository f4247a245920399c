#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace geogns {

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t combine_keys(std::uint64_t a, std::uint64_t b) noexcept {
    return mix64(a + kGoldenGamma * (mix64(b) | 1ULL));
}

// Key of the sample at position `index` of the global batch drawn at `step`.
// It does not depend on how the batch is split across ranks.
constexpr std::uint64_t sample_key(std::uint64_t seed, std::uint64_t step,
                                   std::uint64_t index) noexcept {
    return combine_keys(combine_keys(combine_keys(0x5eedULL, seed), step), index);
}

// Counter-based stream: value i of the stream keyed by k is mix64(k' + i*gamma).
// Satisfies UniformRandomBitGenerator so std distributions can consume it.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) noexcept : state_(mix64(key)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept {
        state_ += kGoldenGamma;
        return mix64(state_);
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double normal() { return normal_(*this); }

private:
    std::uint64_t state_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace geogns

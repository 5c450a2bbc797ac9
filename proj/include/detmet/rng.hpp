#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>

namespace detmet {

// All randomness flows through one seedable 64-bit generator (splitmix64) and
// one stream-derivation rule: a stream seed is the master seed folded with a
// path of words through the splitmix finalizer. Any (replicate, file,
// detector, purpose) cell therefore has a stream that depends only on the
// master seed and the path, never on evaluation order or worker count.

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// One derivation step: fold `word` into `base`.
constexpr std::uint64_t derive(std::uint64_t base, std::uint64_t word) {
    return mix64(base ^ mix64(word + 0x9E3779B97F4A7C15ull));
}

constexpr std::uint64_t derive_path(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
    for (std::uint64_t w : path) base = derive(base, w);
    return base;
}

// Purpose tags keep sibling streams (labels vs. perturbations vs. truth draws
// of the same replicate) disjoint.
inline constexpr std::uint64_t kTagProfiles = 0x70726f66;    // profile draws
inline constexpr std::uint64_t kTagReplicate = 0x7265706c;   // per-replicate base
inline constexpr std::uint64_t kTagTruth = 0x74727574;       // ground-truth index draws
inline constexpr std::uint64_t kTagLabel = 0x6c61626c;       // per-cell label draws
inline constexpr std::uint64_t kTagPerturb = 0x70657274;     // per-cell rate perturbations
inline constexpr std::uint64_t kTagMcSample = 0x6d635f73;    // Monte Carlo tail samples
inline constexpr std::uint64_t kTagSubset = 0x73756273;      // random subset augmentation

class Rng {
public:
    explicit constexpr Rng(std::uint64_t seed) : state_(seed) {}

    constexpr std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix64(state_);
    }

    /// Uniform double in [0, 1), 53-bit resolution. Comparing `next_double() < p`
    /// yields an exact Bernoulli at the endpoints: never true for p = 0,
    /// always true for p = 1.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound); bound >= 1. Debiased multiply-shift.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("next_below needs bound >= 1");
        // Lemire's method with rejection of the biased band.
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = -bound % bound;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

private:
    std::uint64_t state_;
};

}  // namespace detmet

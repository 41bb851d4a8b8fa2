#pragma once

#include <cmath>
#include <cstdint>

namespace rcp {

// Deterministic 64-bit generator (splitmix64). Hand-rolled so that draw
// sequences are identical across compilers and standard libraries; the
// std <random> distributions make no such guarantee.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). n must be >= 1.
    std::uint64_t uniform_index(std::uint64_t n) {
        return std::uint64_t((__uint128_t(next_u64()) * n) >> 64);
    }

    /// Standard normal via Box-Muller. Consumes two draws, returns one;
    /// no cached second value so the stream position stays predictable.
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 < 0x1.0p-100) u1 = 0x1.0p-100;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

private:
    std::uint64_t state_;
};

// Named sub-streams hanging off one root seed. Every source of randomness
// in a run draws from one of these, which is what makes whole runs
// reproducible from (config, seed) alone.
enum class Stream : std::uint64_t {
    env = 1,             // episode initial states
    policy_init = 2,     // parameter initialization (policy, value, embedding)
    rollout = 3,         // stochastic action sampling during collection
    minibatch = 4,       // replay sampling
    target_sampling = 5, // draws from the target-value model
    eval = 6,            // evaluation episodes (seeds and diagnostic draws)
};

/// Derive the seed of a sub-stream; `k` separates per-episode / per-worker uses.
inline std::uint64_t substream_seed(std::uint64_t root, Stream s, std::uint64_t k = 0) {
    Rng mix(root ^ (0x517cc1b727220a95ULL * (std::uint64_t(s) + 1)));
    mix.next_u64();
    std::uint64_t base = mix.next_u64();
    return base + 0x9e3779b97f4a7c15ULL * k;
}

inline Rng substream(std::uint64_t root, Stream s, std::uint64_t k = 0) {
    return Rng(substream_seed(root, s, k));
}

}  // namespace rcp

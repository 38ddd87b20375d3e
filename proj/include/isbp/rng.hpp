#pragma once

// Seeded random streams with a platform-independent output sequence.
//
// std::mt19937_64 is fully specified by the standard, but the standard
// distributions are not, so uniform and normal variates are derived here from
// raw engine output. Any (seed) therefore yields the same bits on every
// toolchain, which the dataset byte-identity guarantee relies on.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace isbp {

/// SplitMix64 finalizer: a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derive a child seed from a parent seed and a path of indices, e.g.
/// derive_seed(global, {sample_id}) or derive_seed(sample, {snapshot, bs}).
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(parent);
    for (auto v : path) {
        h = mix64(h ^ mix64(v + 0x632BE59BD9B4E019ULL));
    }
    return h;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal (polar method); the second variate of each pair is cached.
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace isbp

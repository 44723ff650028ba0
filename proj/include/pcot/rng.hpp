#pragma once

#include <cstdint>
#include <random>

namespace pcot {

// Seed mixing (splitmix64 finalizer). Used to derive independent streams
// from a user seed so that e.g. sweep point k or optimization step k gets
// its own reproducible stream.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x9E3779B97F4A7C15ull));
}

/// Deterministic random source. The generator family is fixed: an
/// mt19937_64 stream (bit-exact across platforms per the standard) seeded
/// through splitmix64, with uniforms taken as 53-bit mantissas and normal
/// variates produced by Box-Muller. std::normal_distribution is
/// deliberately avoided because its output is implementation-defined and
/// would break golden tests.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; safe as a log() argument.
    double uniform_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal via Box-Muller. Generates pairs; the second value
    /// is cached.
    double normal();

private:
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace pcot

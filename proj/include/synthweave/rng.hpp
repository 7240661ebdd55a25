#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace synthweave {

/// SplitMix64 finalizer. Used both as a seed scrambler and as the mixing
/// step of mix_seed below.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent sub-seed from a tuple of ids (master seed,
/// dataset index, repeat index, ...) by folding each part through
/// SplitMix64. The same tuple always yields the same seed, so work items
/// seeded this way are reproducible under any execution order.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x853c49e6748fea9bULL;
    for (std::uint64_t v : parts) h = splitmix64(h ^ v);
    return h;
}

/// Deterministic random generator: mt19937_64 engine (bit-exact across
/// platforms by the standard) with our own value mappings, so streams do
/// not depend on the standard library's unspecified distribution
/// implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in (0, 1); never returns an exact endpoint, safe for
    /// inverse-CDF sampling.
    double next_open_double() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Rejection sampling, unbiased.
    std::uint64_t next_below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
        std::uint64_t v = next_u64();
        while (v > limit) v = next_u64();
        return v % n;
    }

    std::size_t next_index(std::size_t n) {
        return static_cast<std::size_t>(next_below(n));
    }

    /// Laplace(mu, scale) via inverse CDF. scale = 0 returns mu.
    double next_laplace(double mu, double scale) {
        if (scale <= 0.0) return mu;
        const double u = next_open_double() - 0.5;
        return mu - scale * (u < 0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::fabs(u));
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace synthweave

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tlsh {

/// Derives an independent child seed from a master seed and a tag.
/// SplitMix64 finalizer; cheap, stateless, and stable across platforms.
inline uint64_t derive_seed(uint64_t master, uint64_t tag) {
    uint64_t z = master + 0x9e3779b97f4a7c15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Deterministic random source used everywhere in the library.
///
/// The generator is std::mt19937_64 (bit-exact by the standard); the
/// variate transforms below are hand-rolled so that a stored seed
/// regenerates identical streams regardless of standard-library vendor:
///   uniform01: (x >> 11 + 0.5) * 2^-53, strictly inside (0, 1)
///   normal:    Box-Muller on two uniform01 draws, pair cached
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    /// Uniform draw strictly inside (0, 1).
    double uniform01() {
        return (double(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform draw strictly inside (lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal draw (Box-Muller; consumes two uniforms per pair).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Uniform integer in [0, n).
    uint64_t below(uint64_t n) {
        // Rejection sampling to avoid modulo bias.
        uint64_t limit = ~uint64_t(0) - ~uint64_t(0) % n;
        uint64_t x;
        do { x = gen_(); } while (x >= limit);
        return x % n;
    }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace tlsh

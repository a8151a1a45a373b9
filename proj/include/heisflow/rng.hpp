// Deterministic random number utilities. Two flavours:
//  - Pcg64: a small sequential generator for seeding clouds and tests;
//  - counter-based hashing keyed by (seed, path, step, slot) so that
//    stochastic paths can be generated independently in any order and
//    sigma-sweeps can reuse common random numbers.
#pragma once

#include <cmath>
#include <cstdint>

namespace heisflow {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double u64_to_unit(std::uint64_t v) {
    // strictly inside (0,1): 53 mantissa bits, offset by half an ulp
    return (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53;
}

// Sequential generator (xorshift-multiply); stable across platforms,
// unlike the distributions of <random>.
class Pcg64 {
  public:
    explicit Pcg64(std::uint64_t seed) : state_(splitmix64(seed ^ 0xda3e39cb94b95bdbULL)) {}

    std::uint64_t next_u64() {
        state_ = splitmix64(state_);
        return state_;
    }
    double uniform() { return u64_to_unit(next_u64()); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

  private:
    std::uint64_t state_;
};

// Counter-based: one u64 per (seed, path, step, slot).
inline std::uint64_t counter_u64(std::uint64_t seed, std::uint64_t path,
                                 std::uint64_t step, std::uint64_t slot) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ (path * 0x9e3779b97f4a7c15ULL));
    h = splitmix64(h ^ (step * 0xc2b2ae3d27d4eb4fULL));
    h = splitmix64(h ^ (slot * 0x165667b19e3779f9ULL));
    return h;
}

// Pair of independent standard normals for one (path, step).
inline void counter_normal_pair(std::uint64_t seed, std::uint64_t path,
                                std::uint64_t step, double& z1, double& z2) {
    const double u1 = u64_to_unit(counter_u64(seed, path, step, 0));
    const double u2 = u64_to_unit(counter_u64(seed, path, step, 1));
    const double r = std::sqrt(-2.0 * std::log(u1));
    z1 = r * std::cos(6.283185307179586 * u2);
    z2 = r * std::sin(6.283185307179586 * u2);
}

}  // namespace heisflow

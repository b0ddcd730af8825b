#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "phasegen/common.hpp"

namespace phasegen {

// Deterministic RNG with explicit distributions. std::mt19937_64 is
// standardized bit-for-bit, but the std distributions are not, so uniform
// and normal draws are generated here directly. All pipeline randomness
// flows from one root seed through named sub-streams ("corpus", "ae-init",
// "diff-init", "sampler", ...) so component seeds stay independently
// pinnable.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix(seed)) {}

    Rng(std::uint64_t root_seed, const std::string& stream)
        : Rng(root_seed ^ fnv1a64(stream)) {}

    // xorshift64* core
    std::uint64_t next_u64() {
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 2685821657736338717ull;
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [lo, hi] inclusive
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

    // Box-Muller; one value per call, no cached state, so draw order is
    // trivially reproducible.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Child stream: independent generator derived from this one's seed path.
    Rng fork(const std::string& stream) const { return Rng(state_, stream); }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        x = x ^ (x >> 31);
        return x ? x : 0x9e3779b97f4a7c15ull;
    }

    std::uint64_t state_;
};

}  // namespace phasegen

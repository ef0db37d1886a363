#pragma once

#include <cmath>
#include <cstdint>

namespace trispline {

// splitmix64: the usual 64-bit finalizer, good enough to key independent
// streams off (seed, replicate, subject, pixel) tuples.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 1)));
}

// Small deterministic generator (xoshiro-style state walk via splitmix64).
// We do not use std:: distributions anywhere: their output is
// implementation-defined and would break byte-level reproducibility.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix64(seed ^ 0x5851f42d4c957f2dULL)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in (0,1), never exactly 0 or 1
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    // standard normal via polar Marsaglia; caches the second deviate
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_uniform() - 1.0;
            v = 2.0 * next_uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // N(0,1) truncated to [-bound, bound] by rejection (redraw, not clip)
    double next_truncated_normal(double bound) {
        double x;
        do {
            x = next_normal();
        } while (x < -bound || x > bound);
        return x;
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Rademacher sign keyed by a counter tuple; independent of evaluation order.
inline double rademacher(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return (splitmix64(mix_keys(seed, a) ^ splitmix64(b + 0x632be59bd9b4e019ULL)) >> 63) ? 1.0 : -1.0;
}

inline double rademacher(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return (splitmix64(mix_keys(mix_keys(seed, a), b) ^ splitmix64(c + 0xd6e8feb86659fd93ULL)) >> 63) ? 1.0 : -1.0;
}

} // namespace trispline

#pragma once

// Deterministic per-trajectory random streams.  xoshiro256** seeded through
// splitmix64; trajectory i of master seed s uses the derived seed
// splitmix64_out(s + (i+1) * 0x9E3779B97F4A7C15), so an ensemble reproduces
// exactly for a given (seed, index) regardless of scheduling order.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace rdkmc {

namespace detail {

struct SplitMix64 {
    std::uint64_t x;
    std::uint64_t next() {
        std::uint64_t z = (x += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
};

inline std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

} // namespace detail

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) {
        detail::SplitMix64 sm{seed};
        for (auto& w : s_) w = sm.next();
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    static RngStream for_trajectory(std::uint64_t master_seed, std::uint64_t index) {
        detail::SplitMix64 sm{master_seed + (index + 1) * 0x9E3779B97F4A7C15ull};
        return RngStream(sm.next());
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl(s_[3], 45);
        return result;
    }

    // uniform in [0, 1), 53-bit resolution
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Exp(rate) via -log(1-u); u < 1 so the log argument is never 0.
    double exponential(double rate) {
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        return -std::log1p(-u01()) / rate;
    }

    // standard normal, Box-Muller with the second deviate cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - u01(); // (0, 1]
        const double u2 = u01();
        const double m = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = m * std::sin(a);
        has_spare_ = true;
        return m * std::cos(a);
    }

    // integer in [0, n)
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace rdkmc

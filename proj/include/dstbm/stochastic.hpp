#pragma once

// Seedable samplers for the arrival process, parking durations and driver
// velocities. Streams are platform independent: the bit generator is
// std::mt19937_64 (fully specified by the standard) and every distribution
// is derived here from raw 64-bit words instead of the implementation-defined
// <random> distributions.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "dstbm/error.hpp"

namespace dstbm {

class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 bits of resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Standard normal by the Marsaglia polar method; the second variate of
    // each accepted pair is kept for the next call.
    double standard_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double x = 0, y = 0, s = 0;
        do {
            x = 2.0 * uniform01() - 1.0;
            y = 2.0 * uniform01() - 1.0;
            s = x * x + y * y;
        } while (s >= 1.0 || s == 0.0);
        const double scale = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = y * scale;
        has_spare_ = true;
        return x * scale;
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Poisson arrivals at `lambda` cars per minute.
struct ArrivalProcess {
    double lambda;

    explicit ArrivalProcess(double rate) : lambda(rate) {
        if (!(rate > 0.0) || !std::isfinite(rate)) {
            throw ConfigError("arrival rate lambda must be positive, got " + std::to_string(rate));
        }
    }

    double mean_interval() const noexcept { return 1.0 / lambda; }
};

// Normal(mu, sigma^2) parking durations in minutes, truncated to (0, inf).
struct DurationDistribution {
    double mu;
    double sigma;

    DurationDistribution(double mean, double sd) : mu(mean), sigma(sd) {
        if (!(mean > 0.0) || !std::isfinite(mean)) {
            throw ConfigError("duration mean mu must be positive, got " + std::to_string(mean));
        }
        if (!(sd >= 0.0) || !std::isfinite(sd)) {
            throw ConfigError("duration sigma must be non-negative, got " + std::to_string(sd));
        }
    }
};

// Inverse CDF of Exponential(lambda) at u in [0, 1).
inline double exponential_quantile(double u, double lambda) { return -std::log1p(-u) / lambda; }

inline double sample_interarrival(RandomSource& rng, const ArrivalProcess& proc) {
    return exponential_quantile(rng.uniform01(), proc.lambda);
}

inline constexpr long default_max_rejections = 1'000'000;

inline double sample_duration(RandomSource& rng, const DurationDistribution& dist,
                              long max_attempts = default_max_rejections) {
    if (dist.sigma == 0.0) return dist.mu;
    for (long attempt = 0; attempt < max_attempts; ++attempt) {
        const double d = dist.mu + dist.sigma * rng.standard_normal();
        if (d > 0.0) return d;
    }
    throw ConfigError("parking duration rejection sampler exceeded " +
                      std::to_string(max_attempts) + " attempts (mu=" + std::to_string(dist.mu) +
                      ", sigma=" + std::to_string(dist.sigma) + ")");
}

// Uniform velocity in metres per minute on [v_lo, v_hi].
inline double sample_velocity(RandomSource& rng, double v_lo, double v_hi) {
    if (!(v_lo > 0.0) || !(v_lo <= v_hi) || !std::isfinite(v_hi)) {
        throw ConfigError("velocity bounds must satisfy 0 < v_lo <= v_hi, got [" +
                          std::to_string(v_lo) + ", " + std::to_string(v_hi) + "]");
    }
    if (v_lo == v_hi) return v_lo;
    return v_lo + (v_hi - v_lo) * rng.uniform01();
}

} // namespace dstbm

// bessellab: counter-based random number generation (Philox4x32-10) with one
// independent stream per simulated path, plus the exact samplers the path
// constructions need (normal, gamma, Poisson, exponential).
//
// Counter-based generation is what makes the ensembles reproducible across
// worker counts: the stream for path i depends only on (seed, stream id),
// never on which thread happened to simulate neighbouring paths.
//
// SPDX-License-Identifier: MIT

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace bessellab {

namespace detail {

/// SplitMix64 finalizer; used to expand the user seed into Philox key words
/// so that nearby seeds yield unrelated key material.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/**
 * Philox4x32-10 counter-based generator bound to one logical stream.
 *
 * Key = expanded user seed; counter = (block index, stream id). Each call to
 * next_u32 walks through the 4 words of the current block and then advances
 * the 64-bit block index, so a single stream supplies 2^66 words. Distinct
 * stream ids give statistically independent sequences for the same seed,
 * which is how per-path reproducibility independent of the worker layout is
 * achieved.
 */
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : block_(0), pos_(4), has_cached_normal_(false), cached_normal_(0.0) {
        const std::uint64_t k = detail::splitmix64(seed);
        key0_ = static_cast<std::uint32_t>(k);
        key1_ = static_cast<std::uint32_t>(k >> 32);
        ctr2_ = static_cast<std::uint32_t>(stream_id);
        ctr3_ = static_cast<std::uint32_t>(stream_id >> 32);
    }

    std::uint32_t next_u32() {
        if (pos_ == 4) {
            fill_block();
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    /// Uniform double strictly inside (0,1): 52 random bits centered in the
    /// lattice, so neither endpoint is attainable and log(u) is always finite.
    double uniform() {
        const double k = static_cast<double>(next_u64() >> 12);
        return (k + 0.5) * (1.0 / 4503599627370496.0);  // 2^-52
    }

    /// Standard normal via Box-Muller; draws are produced in pairs and the
    /// second component is cached.
    double normal() {
        if (has_cached_normal_) {
            has_cached_normal_ = false;
            return cached_normal_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_normal_ = r * std::sin(theta);
        has_cached_normal_ = true;
        return r * std::cos(theta);
    }

    /// Exponential with unit mean.
    double exponential() { return -std::log(uniform()); }

    /**
     * Gamma(shape, scale) by the Marsaglia-Tsang squeeze method; shapes
     * below 1 are boosted through Gamma(shape+1) * U^{1/shape}. Exact in
     * law, O(1) expected draws per variate.
     */
    double gamma(double shape, double scale) {
        if (!(shape > 0.0) || !(scale > 0.0)) {
            throw std::domain_error("RngStream::gamma: shape and scale must be positive");
        }
        if (shape < 1.0) {
            const double boost = std::pow(uniform(), 1.0 / shape);
            return gamma(shape + 1.0, scale) * boost;
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            const double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * scale;
        }
    }

    /**
     * Poisson(mean). Product-of-uniforms inversion for small means and
     * Hormann's PTRD transformed-rejection for mean >= 10; both are exact.
     */
    long long poisson(double mean) {
        if (mean < 0.0) {
            throw std::domain_error("RngStream::poisson: mean must be nonnegative, got " +
                                    std::to_string(mean));
        }
        if (mean == 0.0) return 0;
        if (mean < 10.0) {
            const double limit = std::exp(-mean);
            long long k = 0;
            double p = 1.0;
            do {
                ++k;
                p *= uniform();
            } while (p > limit);
            return k - 1;
        }
        const double slam = std::sqrt(mean);
        const double loglam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = uniform() - 0.5;
            const double v = uniform();
            const double us = 0.5 - std::fabs(u);
            const long long k =
                static_cast<long long>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
            if (us >= 0.07 && v <= vr) return k;
            if (k < 0 || (us < 0.013 && v > us)) continue;
            if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
                -mean + static_cast<double>(k) * loglam - std::lgamma(static_cast<double>(k) + 1.0)) {
                return k;
            }
        }
    }

private:
    void fill_block() {
        std::uint32_t c0 = static_cast<std::uint32_t>(block_);
        std::uint32_t c1 = static_cast<std::uint32_t>(block_ >> 32);
        std::uint32_t c2 = ctr2_;
        std::uint32_t c3 = ctr3_;
        std::uint32_t k0 = key0_;
        std::uint32_t k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = 0xD2511F53ULL * c0;
            const std::uint64_t p1 = 0xCD9E8D57ULL * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
            k0 += 0x9E3779B9U;
            k1 += 0xBB67AE85U;
        }
        buf_[0] = c0;
        buf_[1] = c1;
        buf_[2] = c2;
        buf_[3] = c3;
        ++block_;
    }

    std::uint32_t key0_, key1_;
    std::uint32_t ctr2_, ctr3_;
    std::uint64_t block_;
    std::uint32_t buf_[4];
    int pos_;
    bool has_cached_normal_;
    double cached_normal_;
};

}  // namespace bessellab

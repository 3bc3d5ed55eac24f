// Copyright 2026 spdc-bench developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
// Every draw is a pure function of (seed, pair index, draw position), so
// partitioning a run across any number of workers cannot change the
// sampled values.

namespace spdc::rng {

namespace detail {
constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(product);
    hi = static_cast<std::uint32_t>(product >> 32);
}

inline void philox_round(std::array<std::uint32_t, 4>& ctr, std::array<std::uint32_t, 2>& key) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mul_hi_lo(kPhiloxM4x32A, ctr[0], lo0, hi0);
    mul_hi_lo(kPhiloxM4x32B, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW32A;
    key[1] += kPhiloxW32B;
}
}  // namespace detail

/// One 128-bit Philox4x32-10 block for the given 64-bit key and counter.
inline std::array<std::uint32_t, 4> philox4x32(std::uint64_t key64,
                                               std::array<std::uint32_t, 4> counter) {
    std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(key64),
                                     static_cast<std::uint32_t>(key64 >> 32)};
    for (int round = 0; round < 10; ++round) {
        detail::philox_round(counter, key);
    }
    return counter;
}

/// The random stream of one Monte Carlo trial, keyed by (seed, pair index).
/// Blocks are generated on demand; the block index occupies the third
/// counter word so a single pair may consume up to 2^32 blocks.
class PairStream {
public:
    PairStream(std::uint64_t seed, std::uint64_t pair_index)
        : seed_(seed), pair_(pair_index) {}

    std::uint32_t next_u32() {
        if (lane_ == 4) {
            buffer_ = philox4x32(seed_, {static_cast<std::uint32_t>(pair_),
                                         static_cast<std::uint32_t>(pair_ >> 32), block_++, 0u});
            lane_ = 0;
        }
        return buffer_[lane_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Two independent standard normals by Box-Muller; always consumes
    /// exactly two uniforms so draw positions stay mode-independent.
    std::pair<double, double> next_gaussian2() {
        const double u1 = 1.0 - next_double();  // (0, 1], keeps log finite
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(t), r * std::sin(t)};
    }

private:
    std::uint64_t seed_;
    std::uint64_t pair_;
    std::uint32_t block_ = 0;
    int lane_ = 4;
    std::array<std::uint32_t, 4> buffer_{};
};

}  // namespace spdc::rng

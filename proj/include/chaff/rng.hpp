// Copyright (c) the chaffsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace chaff {

using Rng = std::mt19937_64;

// splitmix64 finalizer; spreads structured seed inputs over 64 bits.
inline constexpr std::uint64_t mix_bits(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

// Seed for a named sub-stream (e.g. one per node, or one per Monte-Carlo
// replicate) of a seeded context. Deterministic and order-free: stream k of
// seed s is the same no matter which streams were drawn before it.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                           std::uint64_t stream,
                                           std::uint64_t index = 0) noexcept {
    std::uint64_t h = mix_bits(seed + 0x9e3779b97f4a7c15ull);
    h = mix_bits(h ^ (stream + 0x9e3779b97f4a7c15ull));
    h = mix_bits(h ^ (index + 0xd1b54a32d192ed03ull));
    return h;
}

// Role tags XOR-ed into per-run seeds. Scheduler and event randomness stay
// decoupled, so experiment variants sharing a base seed see the same events.
inline constexpr std::uint64_t kSchedulerRole = 0x5343484544ull;
inline constexpr std::uint64_t kEventsRole = 0x4556454e5453ull;
inline constexpr std::uint64_t kTableRole = 0x5441424c45ull;

inline constexpr std::uint64_t run_seed(std::uint64_t base_seed,
                                        std::uint64_t run_index,
                                        std::uint64_t role) noexcept {
    return base_seed ^ run_index ^ role;
}

// Uniform on [0, 1), 53-bit resolution.
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform on (0, 1]; safe as a -log argument.
inline double uniform_unit_positive(Rng& rng) {
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

// Uniform on (lo, hi].
inline double uniform_on(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit_positive(rng);
}

// Uniform integer in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform_unit(rng) * static_cast<double>(n));
}

}  // namespace chaff

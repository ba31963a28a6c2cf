#pragma once

// Seeded random streams. Every consumer derives its own generator from a base
// seed plus a path of stream identifiers (e.g. {replication, segment, slice}),
// so results do not depend on evaluation order or worker count.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace tenseg {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::initializer_list<std::uint64_t> stream) noexcept {
    std::uint64_t s = mix64(base);
    for (std::uint64_t id : stream) s = mix64(s ^ mix64(id + 0x632be59bd9b4e019ULL));
    return s;
}

inline Rng make_rng(std::uint64_t base, std::initializer_list<std::uint64_t> stream = {}) {
    return Rng(derive_seed(base, stream));
}

// Stream tags used across the library.
namespace stream {
inline constexpr std::uint64_t als_init = 1;
inline constexpr std::uint64_t normo_rank = 2;
inline constexpr std::uint64_t precision = 3;
inline constexpr std::uint64_t noise_slice = 4;
inline constexpr std::uint64_t replication = 5;
}  // namespace stream

}  // namespace tenseg

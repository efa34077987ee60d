#pragma once

// Seed mixing and portable draws on top of std::mt19937_64.
//
// std::uniform_int_distribution and friends are implementation-defined, so
// every draw used by the engine goes through the helpers below. Together with
// the standard-defined mt19937_64 output this makes runs bit-identical across
// standard libraries.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace pimp {

using Rng = std::mt19937_64;

/// splitmix64 finalizer: a bijective 64-bit avalanche mix.
constexpr std::uint64_t avalanche(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// FNV-1a over the bytes of a tag; used to turn stream names into integers.
constexpr std::uint64_t tag_hash(std::string_view tag) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Order-sensitive fold of the values through avalanche().
constexpr std::uint64_t mix(std::initializer_list<std::uint64_t> values) noexcept {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t v : values) h = avalanche(h ^ avalanche(v));
    return h;
}

/// A named substream of `seed`, e.g. stream(run_seed, "init-solutions").
inline Rng stream(std::uint64_t seed, std::string_view name, std::uint64_t a = 0,
                  std::uint64_t b = 0) {
    return Rng{mix({seed, tag_hash(name), a, b})};
}

/// Uniform integer in [0, n). Lemire's multiply-shift with rejection; n > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    using u128 = unsigned __int128;
    u128 m = static_cast<u128>(rng()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<u128>(rng()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

/// Uniform integer in [lo, hi].
inline int uniform_int(Rng& rng, int lo, int hi) {
    return lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo) + 1));
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace pimp

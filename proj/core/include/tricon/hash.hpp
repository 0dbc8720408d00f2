#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace tricon {

/// FNV-1a; stable across platforms and runs, unlike std::hash.
constexpr std::uint64_t stable_hash(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic choice in [0, n) from a record id and a run seed.
constexpr std::size_t seeded_pick(std::string_view id, std::uint64_t seed, std::size_t n) noexcept {
    return n == 0 ? 0 : static_cast<std::size_t>(splitmix64(stable_hash(id) ^ splitmix64(seed)) % n);
}

}  // namespace tricon

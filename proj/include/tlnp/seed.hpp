#pragma once

#include <bit>
#include <cstdint>
#include <string_view>

namespace tlnp {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t value) {
    return mix64(seed ^ mix64(value));
}

inline std::uint64_t combine_seed(std::uint64_t seed, double value) {
    return combine_seed(seed, std::bit_cast<std::uint64_t>(value));
}

// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t combine_seed(std::uint64_t seed, std::string_view text) {
    return combine_seed(seed, fnv1a(text));
}

}  // namespace tlnp

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cldyn {

/// SplitMix64 mixing step. Used to derive per-component seeds from a root seed
/// so that every source of randomness in a run hangs off a single knob.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive a child seed from (root, tag). Same inputs, same seed.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the tag
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(root ^ h);
}

/// Derive a child seed from (root, tag, index), e.g. per-task permutations.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index) {
    return splitmix64(derive_seed(root, tag) ^ splitmix64(index));
}

inline std::mt19937_64 make_engine(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace cldyn

#pragma once

#include <cstdint>
#include <random>

namespace segbreak {

/// splitmix64 scrambler; used to derive decorrelated engine seeds from
/// (seed, stream index) pairs so that parallel workers draw from
/// independent, replicate-indexed streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of substream `stream` of a run seeded with `seed`. The mapping is
/// fixed: results must not depend on how streams are assigned to threads.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ (0xd1b54a32d192ed03ULL * (stream + 1)));
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
    return std::mt19937_64(derive_seed(seed, stream));
}

}  // namespace segbreak

#pragma once

#include <cstdint>
#include <iterator>
#include <random>
#include <utility>

namespace passdrop {

// All randomized code draws from std::mt19937_64, whose output sequence is
// fixed by the standard. The standard distributions are not, so bounded draws
// and shuffles are done here.
using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed for stream `stream` of a run seeded with `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 1));
}

// Independent engine for replicate `stream` of a run seeded with `seed`.
// Replicate b always sees the same draws regardless of scheduling.
inline Engine substream(std::uint64_t seed, std::uint64_t stream) { return Engine(derive_seed(seed, stream)); }

// Uniform integer in [0, n) by rejection; n > 0.
inline std::uint64_t uniform_index(Engine& eng, std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t x = eng();
        if (x >= threshold) return x % n;
    }
}

// Uniform real in [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

// Fisher-Yates from the back.
template <typename RandomIt>
void shuffle(RandomIt first, RandomIt last, Engine& eng) {
    auto n = static_cast<std::uint64_t>(std::distance(first, last));
    for (; n > 1; --n) {
        auto j = uniform_index(eng, n);
        using std::swap;
        swap(first[n - 1], first[j]);
    }
}

} // namespace passdrop

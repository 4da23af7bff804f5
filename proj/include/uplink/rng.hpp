#pragma once

#include <cstdint>
#include <random>

namespace uplink {

// Pipeline stages draw from disjoint substreams so that a change in one
// stage (or in trial scheduling) cannot shift the draws of another.
enum class RngStage : std::uint64_t {
    topology = 1,
    shadowing = 2,
    panel = 3,
    oracle = 4,
    testing = 5,
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace detail

// Counter-style key derivation: (seed, trial, stage) fully determines the
// stream, independent of creation order or worker count.
inline std::uint64_t derive_stream_key(std::uint64_t seed, std::uint64_t trial,
                                       std::uint64_t stage) {
    std::uint64_t k = detail::splitmix64(seed);
    k = detail::splitmix64(k ^ detail::splitmix64(trial + 0x632BE59BD9B4E019ull));
    k = detail::splitmix64(k ^ detail::splitmix64(stage + 0x9E6C63D0876A9A47ull));
    return k;
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t trial, RngStage stage) {
    return std::mt19937_64(derive_stream_key(seed, trial, static_cast<std::uint64_t>(stage)));
}

} // namespace uplink

#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace lvc {

// splitmix64: used to derive independent stream seeds (per clip, per shape)
// from a base seed without correlated low bits.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream + 0x51ed270b7a04a6a5ULL));
}

template <typename T>
void fill_randn(std::span<T> out, std::mt19937_64& rng, double stddev = 1.0) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (auto& v : out) v = static_cast<T>(dist(rng));
}

template <typename T>
void fill_uniform(std::span<T> out, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    for (auto& v : out) v = static_cast<T>(dist(rng));
}

}  // namespace lvc

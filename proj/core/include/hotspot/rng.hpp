#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace hotspot {

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// FNV-1a; stable across platforms, used to key streams by name.
inline std::uint64_t hash_name(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Counter-based generator: draw k of stream (seed, path...) is mix64(key + k * golden),
// so any stream can be reproduced independently of every other one. Uniform
// and Bernoulli draws are computed here rather than through <random>
// distributions, whose output is implementation-defined.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> path) : key_(mix64(seed)) {
        for (auto p : path) key_ = mix64(key_ ^ mix64(p + kGolden));
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        ++counter_;
        return mix64(key_ + counter_ * kGolden);
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [0, n) by rejection (unbiased).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = max() - max() % n;
        std::uint64_t x;
        do {
            x = (*this)();
        } while (x >= limit);
        return x % n;
    }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace hotspot

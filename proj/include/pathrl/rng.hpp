#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace pathrl {

// 64-bit FNV-1a. Used for feature hashing and seed derivation; the constants
// are part of the documented file/feature contracts, do not change them.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 14695981039346656037ull) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a64_u64(std::uint64_t v, std::uint64_t h = 14695981039346656037ull) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= 1099511628211ull;
    }
    return h;
}

// splitmix64 finalizer, applied after FNV absorption so derived seeds are
// well mixed even for adjacent indices.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic sub-stream seed from (master seed, tag, indices). Streams for
// rollouts are derived as derive_seed(seed, query_id, sample_index) so results
// do not depend on scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = fnv1a64_u64(master);
    h = fnv1a64(tag, h);
    h = fnv1a64_u64(a, h);
    h = fnv1a64_u64(b, h);
    return mix64(h);
}

// Seeded random stream. Wraps std::mt19937_64 (fully specified by the
// standard) but avoids std::*_distribution, whose outputs are
// implementation-defined; every helper below is documented and portable so
// identical seeds give byte-identical artifacts everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n) by rejection; n must be >= 1.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Standard normal via Box-Muller (no cached spare, one pair per call).
    double gaussian() {
        double u1;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double two_pi = 6.283185307179586;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace pathrl

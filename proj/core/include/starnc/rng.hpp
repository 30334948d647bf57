#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace starnc::rng {

/// SplitMix64 finalizer. Bijective on 64-bit words with good avalanche,
/// which makes mix64(key + i * golden) a counter-based generator: value i of
/// a stream is addressable without replaying the i-1 values before it.
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Value `index` of the stream identified by `key`.
constexpr std::uint64_t at(std::uint64_t key, std::uint64_t index) {
    return mix64(key + (index + 1) * kGolden);
}

/// Folds identifiers (master seed, trial, receiver, ...) into a stream key.
inline std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t k = 0x8E2AB0DE5C1DF00Dull;
    for (std::uint64_t p : parts) k = mix64(k ^ mix64(p + kGolden));
    return k;
}

/// Sequential view over a counter-based stream.
class Counter {
public:
    explicit Counter(std::uint64_t key) : key_(key) {}
    Counter(std::uint64_t master, std::initializer_list<std::uint64_t> parts)
        : key_(derive_key({master})) {
        for (std::uint64_t p : parts) key_ = mix64(key_ ^ mix64(p + kGolden));
    }

    std::uint64_t next_u64() { return at(key_, index_++); }

    /// Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [0, n). Multiply-shift; bias is n/2^64 and irrelevant here.
    std::uint32_t next_below(std::uint32_t n) {
        return static_cast<std::uint32_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool bernoulli(double p) { return next_double() < p; }

    /// Trials until first success (>= 1) for success probability p.
    std::uint64_t geometric(double p) {
        if (p >= 1.0) return 1;
        double u = next_double();
        while (u <= 0.0) u = next_double();
        // failures F with P(F >= j) = (1-p)^j
        double f = std::floor(std::log(u) / std::log1p(-p));
        return 1 + static_cast<std::uint64_t>(f);
    }

    std::uint64_t key() const { return key_; }
    std::uint64_t index() const { return index_; }

private:
    std::uint64_t key_;
    std::uint64_t index_ = 0;
};

} // namespace starnc::rng

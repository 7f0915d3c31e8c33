#pragma once

#include <cstdint>
#include <string_view>

namespace rap {

/// splitmix64 stream. Used everywhere randomness is needed so that suites,
/// oracle noise and property tests are bit-identical across platforms
/// (libc++/libstdc++ distributions are not).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 mantissa bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [-1, 1).
    double next_signed_unit() { return 2.0 * next_unit() - 1.0; }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t next_below(std::uint64_t n) { return next() % n; }

private:
    std::uint64_t state_;
};

/// Mixes a value into a seed; used to derive per-instance / per-cell streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value) {
    SplitMix64 rng(seed ^ (value + 0x9e3779b97f4a7c15ULL));
    return rng.next();
}

/// FNV-1a over raw bytes.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t hash = 0xcbf29ce484222325ULL) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

inline std::uint64_t fnv1a64(std::string_view text) {
    return fnv1a64(text.data(), text.size());
}

} // namespace rap

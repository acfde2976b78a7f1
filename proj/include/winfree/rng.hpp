#pragma once

#include <cstdint>

namespace winfree {

/// splitmix64: counter-based 64-bit generator. Output k is a pure function of
/// (seed, k), so streams are reproducible across platforms and split points.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

private:
    std::uint64_t state_;
};

/// Stateless mix for deriving independent child seeds (sweep cells, replicates).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
    SplitMix64 g(seed ^ (0x9E3779B97F4A7C15ull * (salt + 1)));
    return g.next();
}

inline constexpr const char* kGeneratorName = "splitmix64";

}  // namespace winfree

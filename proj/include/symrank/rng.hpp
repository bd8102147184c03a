#pragma once

#include <cstdint>
#include <random>

namespace symrank {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

/// SplitMix64 finalizer (Steele/Lea/Flood). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Disjoint seed domains: enlarging one experiment never perturbs another.
enum class SeedDomain : std::uint64_t {
    MatrixEntries = 0x11,
    ChainStep = 0x22,
    SurveyTrial = 0x33,
    MonteCarloBlock = 0x44,
    FormGen = 0x55,
    SpanGen = 0x66,
};

/// The documented mix for parallel work units: the stream for unit `t` under
/// master seed `s` in domain `d` is mix64(mix64(s + golden*d) + golden*t).
/// Pure function of (s, d, t), so results are independent of thread count.
constexpr std::uint64_t derive_seed(std::uint64_t master, SeedDomain domain, std::uint64_t unit) {
    std::uint64_t s = mix64(master + kGolden * static_cast<std::uint64_t>(domain));
    return mix64(s + kGolden * unit);
}

/// Thin deterministic wrapper over std::mt19937_64 (the engine is fully
/// specified by the standard, so streams are portable).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    /// Exactly uniform on [0, bound) by rejection; bound >= 1.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = bound * (~std::uint64_t{0} / bound);
        std::uint64_t r;
        do {
            r = eng_();
        } while (r >= limit);
        return r % bound;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace symrank

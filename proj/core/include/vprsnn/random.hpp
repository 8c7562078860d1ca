#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace vprsnn {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Folds a list of integers into one well-mixed seed.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) noexcept;

/// xoshiro256** generator.
///
/// The library never uses <random> distributions: their algorithms are
/// implementation-defined, and every stream here has to be bit-identical
/// across standard libraries.
class Rng
{
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept;

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept;

    /// Unbiased integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound) noexcept;

    /// Unbiased integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi) noexcept;

    /// Standard normal deviate (Box-Muller, one value per call; the pair's
    /// second value is cached).
    double gaussian() noexcept;

private:
    std::array<std::uint64_t, 4> s_{};
    double cached_gaussian_ = 0.0;
    bool has_cached_ = false;
};

/// Fisher-Yates shuffle driven by Rng, portable across standard libraries.
template <typename It>
void shuffle(It first, It last, Rng& rng)
{
    auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        auto j = rng.below(i);
        std::swap(first[i - 1], first[j]);
    }
}

}  // namespace vprsnn

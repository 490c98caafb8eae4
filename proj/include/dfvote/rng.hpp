#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace dfvote {

/// Philox4x64-10 counter-based generator.
///
/// A stream is identified by (seed, stream index): the seed is the 128-bit
/// key's low word and the stream index occupies the upper half of the
/// 256-bit counter, so distinct streams never overlap. Satisfies
/// UniformRandomBitGenerator and can drive the <random> distributions.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    /// Raw block function, exposed for known-answer tests.
    static std::array<std::uint64_t, 4> block(std::array<std::uint64_t, 4> counter,
                                              std::array<std::uint64_t, 2> key);

private:
    void refill();

    std::array<std::uint64_t, 4> counter_;
    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 4> buffer_{};
    int next_ = 4;
};

/// SplitMix64 finalizer; used to derive child seeds from (seed, index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace dfvote

#pragma once

#include <cstdint>
#include <limits>

namespace steplab {

/// SplitMix64 finalizer. Used both as a hash for stream keys and as the
/// step function of the generator below.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives the key of an independent stream from (seed, counter, tag).
/// Streams for different counters never share state, so draws are a pure
/// function of the triple regardless of evaluation order.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t counter,
                                   std::uint64_t tag = 0) noexcept {
    return mix64(mix64(seed ^ 0x5851f42d4c957f2dULL) ^ mix64(counter + 0x14057b7ef767814fULL) ^
                 (tag * 0xd1342543de82ef95ULL));
}

/// Counter-based generator; satisfies UniformRandomBitGenerator.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// Generator for stream (seed, counter, tag).
inline SplitMix64 make_stream(std::uint64_t seed, std::uint64_t counter, std::uint64_t tag = 0) {
    return SplitMix64(stream_key(seed, counter, tag));
}

}  // namespace steplab

#pragma once

#include <cstdint>
#include <limits>

namespace sfv {

/// Counter-based 64-bit generator. Every (seed, stream...) tuple maps to an
/// independent key; the i-th output of a stream is mix(key + i * golden), so
/// a replicate's draws never depend on which worker ran it or in what order.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

    /// Derive the generator for a sub-stream, e.g. (seed, sweep, replicate).
    [[nodiscard]] CounterRng split(std::uint64_t stream) const {
        CounterRng child(0);
        child.key_ = mix(key_ ^ mix(stream + 0x9e3779b97f4a7c15ULL));
        return child;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

    [[nodiscard]] std::uint64_t counter() const { return counter_; }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace sfv

#pragma once

#include <cstdint>
#include <limits>

namespace riskmdp {

/**
 * Counter-based random stream keyed by (seed, stream index).
 *
 * Draw k of stream s is mix64(key(seed, s) + (k + 1) * golden), the SplitMix64
 * output function applied to a counter, so any stream can be regenerated
 * independently of every other one. Satisfies UniformRandomBitGenerator.
 */
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform on the open interval (0, 1), so -log(u) is finite and positive.
    double uniform_open() noexcept;

    [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

[[nodiscard]] std::uint64_t mix64(std::uint64_t z) noexcept;

}  // namespace riskmdp

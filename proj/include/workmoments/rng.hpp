// rng.hpp: Philox4x32-10 counter-based generator

#pragma once

#include <array>
#include <cstdint>

namespace workmoments {

/// Philox4x32 with 10 rounds. Stateless block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Stream of uniforms for one (seed, stream index) pair. Streams with
/// different indices never share a counter, so trajectory i draws the same
/// numbers no matter which worker runs it.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

    std::uint64_t next_u64() noexcept;
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_{0};
    std::array<std::uint32_t, 4> buffer_{};
    unsigned used_{4};
};

} // namespace workmoments

#include "doctest.h"

#include <cmath>
#include <set>

#include "workmoments/rng.hpp"

using namespace workmoments;

// Known-answer vectors published with the Random123 reference implementation.
TEST_CASE("philox4x32-10 known answers") {
    using Block = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u}) == Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("CounterRng: reproducible per (seed, stream)") {
    CounterRng a(42, 7), b(42, 7);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("CounterRng: distinct streams and seeds give distinct draws") {
    std::set<std::uint64_t> firsts;
    for (std::uint64_t s = 0; s < 100; ++s) {
        CounterRng r(1, s);
        firsts.insert(r.next_u64());
    }
    for (std::uint64_t seed = 2; seed < 102; ++seed) {
        CounterRng r(seed, 0);
        firsts.insert(r.next_u64());
    }
    CHECK(firsts.size() == 200);
}

TEST_CASE("CounterRng: uniforms lie in [0, 1) with the right mean and variance") {
    CounterRng r(2013, 0);
    const int n = 1000000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sum2 += u * u;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean - 0.5) <= 5.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(var - 1.0 / 12.0) <= 1e-3);
}

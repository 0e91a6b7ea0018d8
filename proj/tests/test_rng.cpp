#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "vnet/rng.hpp"

using namespace vnet;

TEST_CASE("philox4x32-10 reference vectors") {
    // Known-answer vectors published with the reference implementation
    // (Random123 KAT file, philox4x32 rounds=10).
    auto out = philox4x32({0u, 0u, 0u, 0u}, {0u, 0u});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);

    out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                     {0xffffffffu, 0xffffffffu});
    CHECK(out[0] == 0x408f276du);
    CHECK(out[1] == 0x41c83b0eu);
    CHECK(out[2] == 0xa20bc7c6u);
    CHECK(out[3] == 0x6d5451fdu);

    out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                     {0xa4093822u, 0x299f31d0u});
    CHECK(out[0] == 0xd16cfe09u);
    CHECK(out[1] == 0x94fdccebu);
    CHECK(out[2] == 0x5001e420u);
    CHECK(out[3] == 0x24126ea1u);
}

TEST_CASE("substreams are deterministic and distinct") {
    Substream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    bool same_ab = true, same_ac = true, same_ad = true;
    std::vector<std::uint64_t> first;
    for (int i = 0; i < 64; ++i) {
        const auto va = a.next_u64();
        first.push_back(va);
        same_ab &= (va == b.next_u64());
        same_ac &= (va == c.next_u64());
        same_ad &= (va == d.next_u64());
    }
    CHECK(same_ab);
    CHECK_FALSE(same_ac);
    CHECK_FALSE(same_ad);

    // Re-constructing restarts the stream from the top.
    Substream a2(42, 7);
    CHECK(a2.next_u64() == first[0]);
    CHECK(a2.next_u64() == first[1]);
}

TEST_CASE("uniform stays in range and fills the interval") {
    Substream r(1, 0);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.001);
    CHECK(hi > 0.999);

    Substream r2(1, 1);
    for (int i = 0; i < 1000; ++i) {
        const double u = r2.uniform(-3.0, 5.0);
        CHECK(u >= -3.0);
        CHECK(u < 5.0);
    }
}

TEST_CASE("exponential matches its mean") {
    Substream r(9, 3);
    const double mean = 2.5;
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += r.exponential(mean);
    // Std error of the sample mean is mean/sqrt(n) ~ 0.0056; allow 5 sigma.
    CHECK(std::abs(sum / n - mean) < 5.0 * mean / std::sqrt((double)n));
}

TEST_CASE("poisson matches mean and variance in both regimes") {
    for (double mu : {0.3, 3.0, 9.5, 10.5, 42.0, 300.0}) {
        Substream r(123, (std::uint64_t)(mu * 100));
        const int n = 120000;
        double sum = 0.0, sumsq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double k = (double)r.poisson(mu);
            sum += k;
            sumsq += k * k;
        }
        const double m = sum / n;
        const double v = sumsq / n - m * m;
        // Mean estimator sigma = sqrt(mu/n); allow 5 sigma. Variance within 5%.
        CHECK(std::abs(m - mu) < 5.0 * std::sqrt(mu / n));
        CHECK(v == doctest::Approx(mu).epsilon(0.05));
    }
}

TEST_CASE("poisson zero mean yields zero") {
    Substream r(5, 5);
    for (int i = 0; i < 10; ++i) CHECK(r.poisson(0.0) == 0);
}

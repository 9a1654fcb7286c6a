#include <doctest.h>

#include <cmath>
#include <vector>

#include "pvlab/process.hpp"
#include "pvlab/rng.hpp"

using namespace pvlab;
using doctest::Approx;

// Random123 known-answer vectors for philox4x32-10.
TEST_CASE("philox known answers")
{
    using C = std::array<std::uint32_t, 4>;
    using K = std::array<std::uint32_t, 2>;
    CHECK(philox4x32(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, K{0xffffffffu, 0xffffffffu})
          == C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, K{0xa4093822u, 0x299f31d0u})
          == C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("stream derivation")
{
    CHECK(derive_stream(9, 0, 0u).stream == 0);
    CHECK(derive_stream(9, 2, 3u).stream == 35);
    CHECK(derive_stream(9, 2, 3u).seed == 9);
    CHECK_FALSE(derive_stream(9, 2, 3u) == derive_stream(9, 3, 2u));
    CHECK_THROWS_AS(derive_stream(9, 0, 16u), std::invalid_argument);
    CHECK(derive_stream(9, 4, StreamRole::Query).stream == 65);
}

TEST_CASE("generator basics")
{
    Generator a(RngStream{7, 3}), b(RngStream{7, 3}), c(RngStream{7, 4});
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        CHECK(x == b());
        differs = differs || x != c();
    }
    CHECK(differs);

    Generator g(RngStream{1, 1});
    double sum = 0.0, sum_sq = 0.0, lo = 1.0, hi = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = g.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
        sum_sq += u * u;
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
    CHECK(sum / n == Approx(0.5).epsilon(4.0 * std::sqrt(1.0 / 12.0 / n) / 0.5));
    CHECK(sum_sq / n - (sum / n) * (sum / n) == Approx(1.0 / 12.0).epsilon(0.01));

    Generator h(RngStream{1, 2});
    double ns = 0.0, ns2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = h.normal();
        ns += z;
        ns2 += z * z;
    }
    CHECK(std::abs(ns / n) < 4.0 / std::sqrt(n));
    CHECK(ns2 / n == Approx(1.0).epsilon(0.02));

    SUBCASE("seek restarts a block")
    {
        Generator p(RngStream{3, 0});
        std::vector<std::uint64_t> first;
        for (int i = 0; i < 6; ++i)
            first.push_back(p());
        p.seek(1);
        CHECK(p() == first[2]);
    }
}

TEST_CASE("poisson counts")
{
    for (double mean : {0.5, 7.0, 50.0, 1e4})
    {
        Generator g(RngStream{11, static_cast<std::uint64_t>(mean * 10)});
        const int n = 100000;
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double k = static_cast<double>(g.poisson(mean));
            s += k;
            s2 += k * k;
        }
        const double m = s / n;
        const double v = (s2 - n * m * m) / (n - 1);
        CAPTURE(mean);
        CHECK(std::abs(m - mean) < 4.0 * std::sqrt(mean / n));
        CHECK(v / m >= 0.97);
        CHECK(v / m <= 1.03);
    }

    SUBCASE("inversion probabilities for a small mean")
    {
        Generator g(RngStream{12, 0});
        const int n = 200000;
        std::vector<int> counts(8, 0);
        for (int i = 0; i < n; ++i) {
            const auto k = g.poisson(2.0);
            if (k < 8)
                ++counts[k];
        }
        double pk = std::exp(-2.0);
        for (int k = 0; k < 8; ++k) {
            const double expect = n * pk;
            CHECK(std::abs(counts[k] - expect) < 5.0 * std::sqrt(expect) + 1.0);
            pk *= 2.0 / (k + 1);
        }
    }
}

TEST_CASE("sample_poisson")
{
    const Window<2> unit(Point<2>(0, 0), Point<2>(1, 1));

    SUBCASE("mean count over 10^4 draws")
    {
        double total = 0.0;
        const int n = 10000;
        for (int i = 0; i < n; ++i)
            total += static_cast<double>(sample_poisson(unit, 1000.0, derive_stream(3, i, 0u)).size());
        CHECK(std::abs(total / n - 1000.0) <= 4.0 * std::sqrt(1000.0 / n));
    }

    SUBCASE("points lie in the window and are reproducible")
    {
        const Window<3> w(Point<3>(-1, 2, 0), Point<3>(0, 3, 5));
        const auto a = sample_poisson(w, 40.0, RngStream{7, 3});
        const auto b = sample_poisson(w, 40.0, RngStream{7, 3});
        REQUIRE(a.size() == b.size());
        CHECK(a.size() > 0);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(w.contains(a.points[i]));
            CHECK(a.points[i] == b.points[i]);
        }
        CHECK(a.intensity == 40.0);
        CHECK(a.rng == RngStream{7, 3});
    }

    SUBCASE("chi-square uniformity on a 4x4 grid")
    {
        std::vector<double> bins(16, 0.0);
        double total = 0.0;
        for (int r = 0; r < 50; ++r)
            for (const auto& p : sample_poisson(unit, 2000.0, derive_stream(21, r, 0u)).points) {
                ++bins[static_cast<std::size_t>(std::floor(p.x() * 4) + 4 * std::floor(p.y() * 4))];
                ++total;
            }
        double chi2 = 0.0;
        for (double b : bins)
            chi2 += (b - total / 16) * (b - total / 16) / (total / 16);
        // 15 degrees of freedom, upper 0.001 quantile
        CHECK(chi2 < 37.697);
    }

    CHECK_THROWS_AS(sample_poisson(unit, 0.0, RngStream{}), IntensityError);
    CHECK_THROWS_AS(sample_poisson(unit, -3.0, RngStream{}), IntensityError);
    CHECK_THROWS_AS(sample_poisson(unit, 3e9, RngStream{}), IntensityError);
}

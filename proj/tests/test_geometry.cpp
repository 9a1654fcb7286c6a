#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pvlab/geometry.hpp"
#include "pvlab/rng.hpp"

using namespace pvlab;
using doctest::Approx;

namespace {

const double pi = std::numbers::pi;

ConvexBody<2> unit_disk() { return ConvexBody<2>::ball(Point<2>::Zero(), 1.0); }
ConvexBody<2> unit_square() { return ConvexBody<2>::box(Point<2>::Zero(), Point<2>(0.5, 0.5)); }
ConvexBody<2> triangle()
{
    return ConvexBody<2>::polygon({Point<2>(0, 0), Point<2>(1, 0), Point<2>(0, 1)});
}

// periodic trapezoid rule converges geometrically for smooth integrands
double perimeter_quadrature(double a, double b)
{
    const int n = 4000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * pi * i / n;
        s += std::hypot(a * std::sin(t), b * std::cos(t));
    }
    return s * 2.0 * pi / n;
}

}  // namespace

TEST_CASE("volume examples")
{
    CHECK(volume(unit_square()) == Approx(1.0).epsilon(1e-15));
    CHECK(volume(unit_disk()) == Approx(pi).epsilon(1e-15));
    CHECK(volume(triangle()) == Approx(0.5).epsilon(1e-15));
    CHECK(volume(ConvexBody<3>::ball(Point<3>::Zero(), 2.0)) == Approx(4.0 / 3.0 * pi * 8.0));
    CHECK(volume(ConvexBody<2>::ellipse(Point<2>(1, 1), 2.0, 0.5)) == Approx(pi));
}

TEST_CASE("intrinsic volumes")
{
    const auto sq = intrinsic_volumes(unit_square());
    REQUIRE(sq.size() == 3);
    CHECK(sq[0] == 1.0);
    CHECK(sq[1] == Approx(2.0));
    CHECK(sq[2] == Approx(1.0));

    const auto disk = intrinsic_volumes(unit_disk());
    CHECK(disk[1] == Approx(pi));
    CHECK(disk[2] == Approx(pi));

    const auto ball = intrinsic_volumes(ConvexBody<3>::ball(Point<3>::Zero(), 1.0));
    CHECK(ball[1] == Approx(4.0));
    CHECK(ball[2] == Approx(2.0 * pi));
    CHECK(ball[3] == Approx(4.0 / 3.0 * pi));

    // sides 2, 4, 6
    const auto box = intrinsic_volumes(ConvexBody<3>::box(Point<3>::Zero(), Point<3>(1, 2, 3)));
    CHECK(box[1] == Approx(12.0));
    CHECK(box[2] == Approx(44.0));
    CHECK(box[3] == Approx(48.0));

    const auto tri = intrinsic_volumes(triangle());
    CHECK(tri[1] == Approx((2.0 + std::sqrt(2.0)) / 2.0));

    SUBCASE("homogeneity V_i(rK) = r^i V_i(K)")
    {
        const auto a = intrinsic_volumes(ConvexBody<3>::box(Point<3>::Zero(), Point<3>(1, 2, 3)));
        const auto b = intrinsic_volumes(scaled(ConvexBody<3>::box(Point<3>::Zero(), Point<3>(1, 2, 3)), 0.3));
        for (int i = 0; i <= 3; ++i)
            CHECK(b[i] == Approx(std::pow(0.3, i) * a[i]).epsilon(1e-12));
    }
}

TEST_CASE("ellipse perimeter against quadrature")
{
    for (auto [a, b] : {std::pair{1.0, 1.0}, {2.0, 1.0}, {0.3, 1.7}, {5.0, 0.01}})
        CHECK(ellipse_perimeter(a, b) == Approx(perimeter_quadrature(a, b)).epsilon(1e-9));
    const auto v = intrinsic_volumes(ConvexBody<2>::ellipse(Point<2>::Zero(), 2.0, 1.0));
    CHECK(v[1] == Approx(perimeter_quadrature(2.0, 1.0) / 2.0).epsilon(1e-9));
}

TEST_CASE("Steiner formula")
{
    CHECK(parallel_volume(unit_disk(), 0.5) == Approx(pi * 2.25));
    const auto box = ConvexBody<2>::box(Point<2>::Zero(), Point<2>(1, 2));
    CHECK(parallel_volume(box, 0.3) == Approx(8.0 + 12.0 * 0.3 + pi * 0.09));
    CHECK(parallel_volume(ConvexBody<3>::ball(Point<3>::Zero(), 1.0), 1.0) == Approx(4.0 / 3.0 * pi * 8.0));
    CHECK(parallel_volume(triangle(), 0.0) == Approx(0.5));
}

TEST_CASE("contains is closed")
{
    CHECK(contains(unit_disk(), Point<2>(0, 0)));
    CHECK(contains(unit_disk(), Point<2>(1, 0)));
    CHECK_FALSE(contains(unit_disk(), Point<2>(1.0001, 0)));
    CHECK(contains(triangle(), Point<2>(0.5, 0.5)));
    CHECK_FALSE(contains(triangle(), Point<2>(0.5, 0.5001)));
    CHECK(contains(unit_square(), Point<2>(0.5, -0.5)));
    CHECK(contains(ConvexBody<2>::ellipse(Point<2>::Zero(), 2, 1), Point<2>(2, 0)));
    CHECK_FALSE(contains(ConvexBody<2>::ellipse(Point<2>::Zero(), 2, 1), Point<2>(1.9, 0.5)));
}

TEST_CASE("boundary distance")
{
    CHECK(boundary_distance(unit_disk(), Point<2>(0, 0)) == Approx(1.0));
    CHECK(boundary_distance(unit_disk(), Point<2>(2, 0)) == Approx(1.0));
    CHECK(boundary_distance(unit_square(), Point<2>(0, 0)) == Approx(0.5));
    CHECK(boundary_distance(unit_square(), Point<2>(1.5, 1.5)) == Approx(std::sqrt(2.0)));
    CHECK(boundary_distance(triangle(), Point<2>(1, 1)) == Approx(std::sqrt(2.0) / 2.0));
    CHECK(boundary_distance(ConvexBody<3>::box(Point<3>::Zero(), Point<3>(1, 2, 3)), Point<3>(0, 0, 0))
          == Approx(1.0));

    SUBCASE("ellipse against a dense boundary sample")
    {
        const auto e = ConvexBody<2>::ellipse(Point<2>(0.3, -0.2), 2.0, 0.7);
        Generator g(derive_stream(5, 0, 0u));
        const int m = 200000;
        for (int trial = 0; trial < 30; ++trial) {
            const Point<2> y(g.uniform(-3, 3), g.uniform(-2, 2));
            auto dist = [&](double t) {
                return (Point<2>(0.3 + 2.0 * std::cos(t), -0.2 + 0.7 * std::sin(t)) - y).norm();
            };
            int arg = 0;
            for (int i = 1; i < m; ++i)
                if (dist(2.0 * pi * i / m) < dist(2.0 * pi * arg / m))
                    arg = i;
            // ternary refinement between the neighbouring samples
            double lo = 2.0 * pi * (arg - 1) / m, hi = 2.0 * pi * (arg + 1) / m;
            for (int it = 0; it < 200; ++it) {
                const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
                if (dist(m1) < dist(m2))
                    hi = m2;
                else
                    lo = m1;
            }
            CHECK(boundary_distance(e, y) == Approx(dist(0.5 * (lo + hi))).epsilon(1e-9));
        }
    }
}

TEST_CASE("inradius")
{
    CHECK(inradius(unit_disk()) == Approx(1.0));
    CHECK(inradius(ConvexBody<2>::box(Point<2>::Zero(), Point<2>(0.5, 0.25))) == Approx(0.25));
    CHECK(inradius(triangle()) == Approx((2.0 - std::sqrt(2.0)) / 2.0).epsilon(1e-12));
    CHECK(inradius(ConvexBody<2>::ellipse(Point<2>::Zero(), 3.0, 0.4)) == Approx(0.4));

    SUBCASE("polygon inradius against grid max-min boundary distance")
    {
        const auto hex = ConvexBody<2>::polygon({Point<2>(0, 0), Point<2>(2, 0), Point<2>(3, 1), Point<2>(2.5, 2),
                                                 Point<2>(0.5, 2.2), Point<2>(-0.4, 1)});
        double best = 0.0;
        for (int i = 0; i <= 800; ++i)
            for (int j = 0; j <= 800; ++j) {
                const Point<2> y(-0.4 + 3.4 * i / 800, 2.2 * j / 800);
                if (contains(hex, y))
                    best = std::max(best, boundary_distance(hex, y));
            }
        CHECK(inradius(hex) >= best - 1e-12);
        CHECK(inradius(hex) <= best + 5e-3);
    }
}

TEST_CASE("dilated window")
{
    const auto w = dilated_window(unit_disk(), 0.5);
    CHECK(w.lower == Point<2>(-1.5, -1.5));
    CHECK(w.upper == Point<2>(1.5, 1.5));
    const auto s = dilated_window(unit_square(), 0.0);
    CHECK(s.lower == Point<2>(-0.5, -0.5));
    CHECK(s.upper == Point<2>(0.5, 0.5));
    const auto t = dilated_window(triangle(), 1.0);
    CHECK(t.lower == Point<2>(-1, -1));
    CHECK(t.upper == Point<2>(2, 2));
}

TEST_CASE("invalid bodies are rejected")
{
    CHECK_THROWS_AS(ConvexBody<2>::ball(Point<2>::Zero(), -1.0), GeometryError);
    CHECK_THROWS_AS(ConvexBody<2>::ball(Point<2>::Zero(), 0.0), GeometryError);
    CHECK_THROWS_AS(ConvexBody<2>::box(Point<2>::Zero(), Point<2>(1, 0)), GeometryError);
    CHECK_THROWS_AS(ConvexBody<2>::ellipse(Point<2>::Zero(), 1, -2), GeometryError);
    // clockwise
    CHECK_THROWS_AS(ConvexBody<2>::polygon({Point<2>(0, 0), Point<2>(0, 1), Point<2>(1, 0)}), GeometryError);
    // collinear consecutive vertices
    CHECK_THROWS_AS(ConvexBody<2>::polygon({Point<2>(0, 0), Point<2>(0.5, 0), Point<2>(1, 0), Point<2>(0, 1)}),
                    GeometryError);
    // non-convex
    CHECK_THROWS_AS(ConvexBody<2>::polygon({Point<2>(0, 0), Point<2>(2, 0), Point<2>(1, 0.3), Point<2>(2, 2),
                                            Point<2>(0, 2)}),
                    GeometryError);
    CHECK_THROWS_AS(ConvexBody<2>::polygon({Point<2>(0, 0), Point<2>(1, 0)}), GeometryError);
    // repeated vertex is merged, not an error
    const auto p = ConvexBody<2>::polygon({Point<2>(0, 0), Point<2>(1, 0), Point<2>(1, 0), Point<2>(0, 1)});
    CHECK(p.vertices().size() == 3);
    CHECK_THROWS_AS(Window<2>(Point<2>(0, 0), Point<2>(1, 0)), GeometryError);
}

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pvlab/estimator.hpp"
#include "pvlab/query.hpp"
#include "pvlab/stats.hpp"

using namespace pvlab;
using doctest::Approx;

namespace {

const ConvexBody<2> disk = ConvexBody<2>::ball(Point<2>::Zero(), 1.0);

}  // namespace

TEST_CASE("margins")
{
    const Margins m = choose_margins(disk, 1000.0, 1e-6);
    const double c = std::max(1.0, 1000.0 * parallel_volume(disk, 1.0));
    const double reach = std::sqrt(std::log(c / 1e-6) / (1000.0 * std::numbers::pi));
    CHECK(m.outer == Approx(2.0 * reach));
    CHECK(m.process == Approx(3.0 * reach));

    CHECK(choose_margins(disk, 1000.0, 0.5).outer < choose_margins(disk, 1000.0, 0.01).outer);
    CHECK(choose_margins(disk, 1000.0, 1.0 - 1e-12).outer < 0.2);

    // doubling lambda with C pinned (tiny body, C = 1) shrinks by 2^(-1/d)
    const auto tiny = ConvexBody<2>::ball(Point<2>::Zero(), 1e-6);
    const double r1 = choose_margins(tiny, 0.1, 1e-6).outer;
    const double r2 = choose_margins(tiny, 0.2, 1e-6).outer;
    CHECK(r2 / r1 == Approx(std::pow(2.0, -0.5)));

    const auto w = estimation_windows(disk, 1000.0, 1e-6);
    CHECK(w.process.contains(w.outer));
    CHECK(w.outer.contains(bounding_box(disk)));
}

TEST_CASE("jittered cells and effective query counts")
{
    CHECK(jitter_cells_per_axis<2>(200) == 10);
    CHECK(jitter_cells_per_axis<3>(2000) == 10);
    CHECK(effective_queries<2>(200, QueryScheme::Jittered) == 200);
    CHECK(effective_queries<2>(201, QueryScheme::Uniform) == 201);
}

TEST_CASE("integrate_box on known integrands")
{
    const Window<2> w(Point<2>(0, 0), Point<2>(2, 1));
    for (auto scheme : {QueryScheme::Uniform, QueryScheme::Jittered}) {
        Generator g(RngStream{2, 0});
        const auto r = integrate_box<2>(w, 20000, scheme, g, [](const Point<2>& y) {
            return std::array<double, 2>{1.0, y.x() * y.y()};
        });
        CHECK(r[0].value == Approx(2.0));
        CHECK(r[0].stderr_ == Approx(0.0));
        // int_0^2 int_0^1 xy = 1
        CHECK(std::abs(r[1].value - 1.0) < 4.0 * r[1].stderr_ + 1e-12);
        CHECK(r[1].stderr_ > 0.0);
    }
}

TEST_CASE("degenerate realizations")
{
    const double lambda = 1000.0;
    const auto win = estimation_windows(disk, lambda, 1e-6);
    EstimatorOptions opt;
    opt.n_query = 4000;

    SUBCASE("single nucleus inside K: everything assigned to K")
    {
        PointSample<2> s{PointList<2>{Point<2>(0, 0)}, win.process, lambda, RngStream{}};
        const NnIndex<2> index(s);
        const auto est = estimate_pv(disk, lambda, s, index, opt, RngStream{1, 1});
        CHECK(est.degenerate());
        CHECK(est.no_nucleus_outside_body);
        CHECK(est.value == Approx(win.outer.volume()));
    }

    SUBCASE("no nucleus in K")
    {
        PointSample<2> s{PointList<2>{win.process.upper}, win.process, lambda, RngStream{}};
        const NnIndex<2> index(s);
        const auto pair = estimate_pv_symdiff(disk, lambda, s, index, opt, RngStream{1, 1});
        CHECK(pair.pv.degenerate());
        CHECK(pair.pv.no_nucleus_in_body);
        CHECK(pair.pv.value == 0.0);
        // every query inside K is misassigned
        CHECK(std::abs(pair.symdiff.value - std::numbers::pi) < 4.0 * pair.symdiff.mc_stderr);
    }

    SUBCASE("empty realization")
    {
        const auto tiny = ConvexBody<2>::ball(Point<2>::Zero(), 0.01);
        // a loose leak budget keeps the window small enough that empty
        // realizations are common
        EstimatorOptions loose = opt;
        loose.epsilon = 0.9;
        const auto w = estimation_windows(tiny, 0.05, loose.epsilon).process;
        std::uint64_t rep = 0;
        while (rep < 1000 && !sample_poisson(w, 0.05, derive_stream(1, rep, StreamRole::Process)).empty())
            ++rep;
        REQUIRE(rep < 1000);
        const auto rec = simulate_replication(tiny, 0.05, loose, 1, rep);
        CHECK(rec.degenerate);
        CHECK(rec.pv == 0.0);
        CHECK(rec.n_points == 0);
        CHECK(rec.symdiff == Approx(volume(tiny)));
    }
}

TEST_CASE("single realization is reproducible")
{
    EstimatorOptions opt;
    opt.n_query = 5000;
    const auto a = simulate_replication(disk, 300.0, opt, 42, 5);
    const auto b = simulate_replication(disk, 300.0, opt, 42, 5);
    CHECK(a.pv == b.pv);
    CHECK(a.symdiff == b.symdiff);
    CHECK(a.stream == 80);
    CHECK_FALSE(a.degenerate);
}

TEST_CASE("estimate is unbiased at moderate scale")
{
    EstimatorOptions opt;
    opt.scheme = QueryScheme::Jittered;
    std::vector<double> pv, symdiff_lo, symdiff_hi;
    for (int r = 0; r < 200; ++r) {
        pv.push_back(simulate_replication(disk, 500.0, opt, 77, r).pv);
        symdiff_lo.push_back(simulate_replication(disk, 250.0, opt, 78, r).symdiff);
        symdiff_hi.push_back(simulate_replication(disk, 1000.0, opt, 79, r).symdiff);
    }
    const Moments m = moments(pv);
    CHECK(std::abs(m.mean - std::numbers::pi) <= 4.0 * std::sqrt(m.variance / 200.0));
    // symmetric difference shrinks like lambda^(-1/2)
    CHECK(moments(symdiff_hi).mean / moments(symdiff_lo).mean < 0.6);
}

TEST_CASE("stratified error is far below the plain one")
{
    EstimatorOptions plain, jit;
    plain.n_query = jit.n_query = 20000;
    jit.scheme = QueryScheme::Jittered;
    const auto a = simulate_replication(disk, 500.0, plain, 3, 0);
    const auto b = simulate_replication(disk, 500.0, jit, 3, 0);
    CHECK(b.mc_stderr < 0.5 * a.mc_stderr);
    CHECK(std::abs(a.pv - b.pv) < 4.0 * std::hypot(a.mc_stderr, b.mc_stderr));
}

#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "pvlab/campaign.hpp"
#include "pvlab/exact2d.hpp"
#include "pvlab/nn.hpp"
#include "pvlab/report.hpp"

namespace pvlab {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace selftest {

/// Index answers equal brute force (index and distance bit for bit) over
/// 100 random instances in d = 2 and 3, queries inside and outside the window.
inline CheckResult nn_oracle(std::uint64_t seed, std::size_t instances = 100)
{
    std::size_t mismatches = 0, queries = 0;
    auto run = [&]<int Dim>(std::integral_constant<int, Dim>, std::uint64_t rep) {
        Generator g(derive_stream(seed, rep, StreamRole::Chaos));
        const Window<Dim> win(Point<Dim>::Zero(), Point<Dim>::Constant(1.0 + 3.0 * g.uniform()));
        const double n_target = std::floor(1.0 + 3000.0 * g.uniform());
        const PointSample<Dim> s = sample_poisson(win, n_target / win.volume(), derive_stream(seed, rep, StreamRole::Process));
        if (s.empty())
            return;
        const NnIndex<Dim> index(s);
        for (int q = 0; q < 200; ++q) {
            Point<Dim> y;
            for (int k = 0; k < Dim; ++k)
                y[k] = g.uniform(win.lower[k] - 1.0, win.upper[k] + 1.0);
            if (q % 10 == 0)
                y = s.points[static_cast<std::size_t>(g.uniform() * static_cast<double>(s.size()))];
            const Neighbor a = index.nearest(y);
            const Neighbor b = nearest_bruteforce(s.points, y);
            ++queries;
            if (a.index != b.index || a.distance != b.distance)
                ++mismatches;
        }
    };
    for (std::size_t i = 0; i < instances; ++i)
        (i % 2 == 0) ? run(std::integral_constant<int, 2>{}, i) : run(std::integral_constant<int, 3>{}, i);
    return {"nn_oracle", mismatches == 0,
            std::to_string(mismatches) + " mismatches in " + std::to_string(queries) + " queries"};
}

/// Clipped cells tile the window: sum of areas equals the window area to 1e-9.
inline CheckResult covering_identity(std::uint64_t seed, std::size_t instances = 100)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < instances; ++i) {
        Generator g(derive_stream(seed, 1000 + i, StreamRole::Chaos));
        const std::size_t n = 1 + static_cast<std::size_t>(4999.0 * g.uniform());
        const Window<2> clip(Point<2>(-1.0, -0.5), Point<2>(1.0 + g.uniform(), 0.5 + g.uniform()));
        PointList<2> sites(n);
        for (auto& p : sites)
            p = Point<2>(g.uniform(clip.lower.x(), clip.upper.x()), g.uniform(clip.lower.y(), clip.upper.y()));
        double sum = 0.0;
        for (const auto& c : exact2d::voronoi_cells_clipped(sites, clip))
            sum += c.area;
        worst = std::max(worst, std::abs(sum - clip.volume()) / clip.volume());
    }
    std::ostringstream d;
    d << "max relative error " << format_double(worst);
    return {"covering_identity", worst <= 1e-9, d.str()};
}

/// Steiner formula for the parallel area of a triangle and an ellipse
/// against a hit-or-miss estimate, within 4 standard errors.
inline CheckResult steiner_2d(std::uint64_t seed, std::size_t n = 400000)
{
    PointList<2> tri{Point<2>(0, 0), Point<2>(1, 0), Point<2>(0, 1)};
    const ConvexBody<2> bodies[] = {ConvexBody<2>::polygon(tri),
                                    ConvexBody<2>::ellipse(Point<2>(0.2, -0.1), 1.0, 0.4)};
    const double r = 0.3;
    bool pass = true;
    std::ostringstream d;
    for (std::size_t b = 0; b < 2; ++b) {
        const ConvexBody<2>& body = bodies[b];
        const Window<2> box = dilated_window(body, r);
        Generator g(derive_stream(seed, 2000 + b, StreamRole::Chaos));
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const Point<2> y(g.uniform(box.lower.x(), box.upper.x()), g.uniform(box.lower.y(), box.upper.y()));
            hits += (contains(body, y) || boundary_distance(body, y) <= r) ? 1 : 0;
        }
        const double p = static_cast<double>(hits) / static_cast<double>(n);
        const double est = box.volume() * p;
        const double se = box.volume() * std::sqrt(p * (1 - p) / static_cast<double>(n));
        const double exact = parallel_volume(body, r);
        const double z = (est - exact) / se;
        pass = pass && std::abs(z) <= 4.0;
        d << shape_name(body.shape()) << " z=" << format_double(std::round(z * 100) / 100) << ' ';
    }
    return {"steiner_2d", pass, d.str()};
}

/// Planted exponents come back to 1e-12.
inline CheckResult synthetic_fit()
{
    const std::vector<double> lam{250, 500, 1000, 2000, 4000};
    double worst = 0.0;
    for (double slope : {-1.5, -4.0 / 3.0}) {
        std::vector<double> v;
        for (double l : lam)
            v.push_back(3.7 * std::pow(l, slope));
        worst = std::max(worst, std::abs(fit_scaling(lam, v).slope - slope));
    }
    std::ostringstream d;
    d << "max slope error " << format_double(worst);
    return {"synthetic_fit", worst <= 1e-12, d.str()};
}

/// Two runs of a small campaign, one and four workers, give identical CSV.
inline CheckResult campaign_determinism(std::uint64_t seed)
{
    const ConvexBody<2> disk = ConvexBody<2>::ball(Point<2>::Zero(), 1.0);
    CampaignSettings s;
    s.lambdas = {100.0, 200.0};
    s.replications = 6;
    s.seed = seed;
    s.query_factor = 8.0;
    auto csv = [&](unsigned threads) {
        s.threads = threads;
        std::ostringstream out;
        write_replication_csv(out, run_campaign(disk, s));
        return out.str();
    };
    const std::string a = csv(1), b = csv(4);
    return {"campaign_determinism", a == b && !a.empty(), std::to_string(a.size()) + " bytes compared"};
}

inline std::vector<CheckResult> run_all(std::uint64_t seed)
{
    return {nn_oracle(seed), covering_identity(seed), steiner_2d(seed), synthetic_fit(), campaign_determinism(seed)};
}

}  // namespace selftest
}  // namespace pvlab

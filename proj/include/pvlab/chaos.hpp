#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "pvlab/estimator.hpp"
#include "pvlab/geometry.hpp"
#include "pvlab/nn.hpp"
#include "pvlab/process.hpp"
#include "pvlab/query.hpp"

namespace pvlab {

/// Envelope |f_n| <= exp(-lambda kappa_d r^d) / ((n-1)! lambda), with r the
/// radius of the smallest ball holding the n points.
inline double kernel_bound_separation(int dim, double intensity, int order, double radius)
{
    return std::exp(-intensity * unit_ball_volume(dim) * std::pow(radius, dim)) / (std::tgamma(order) * intensity);
}

/// Envelope |f_n| <= 2 exp(-lambda kappa_d delta^d / 8^d) / (n! lambda),
/// valid when the enclosing-ball center is farther than 8r from the boundary.
inline double kernel_bound_depth(int dim, double intensity, int order, double depth)
{
    return 2.0 * std::exp(-intensity * unit_ball_volume(dim) * std::pow(depth / 8.0, dim))
           / (std::tgamma(order + 1.0) * intensity);
}

/// kappa_d^2 / 8^d exp(-2 (4^d - 2^-d) kappa_d) (1 - exp(-2^-d kappa_d))^2.
inline double first_chaos_lower_constant(int dim)
{
    const double kappa = unit_ball_volume(dim);
    const double tail = 1.0 - std::exp(-std::pow(2.0, -dim) * kappa);
    return kappa * kappa / std::pow(8.0, dim) * std::exp(-2.0 * (std::pow(4.0, dim) - std::pow(2.0, -dim)) * kappa)
           * tail * tail;
}

/// Lower bound C kappa_1 V_{d-1}(K) lambda^(-1-1/d) on lambda int f_1^2,
/// stated for lambda >= (2 / r_K)^d.
template <int Dim>
double first_chaos_lower_bound(const ConvexBody<Dim>& body, double intensity)
{
    return first_chaos_lower_constant(Dim) * unit_ball_volume(1) * intrinsic_volumes(body)[Dim - 1]
           * std::pow(intensity, -1.0 - 1.0 / Dim);
}

template <int Dim>
struct KernelEstimate {
    int order = 1;
    Point<Dim> x1 = Point<Dim>::Zero();
    Point<Dim> x2 = Point<Dim>::Zero();
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::size_t n_outer = 0;

    EIGEN_MAKE_ALIGNED_OPERATOR_NEW
};

struct ChaosOptions {
    std::size_t n_query = 1024;
    QueryScheme scheme = QueryScheme::Jittered;
    double epsilon = kDefaultLeakBudget;
};

/// Box of half-width `outer` margin around each point: the region where
/// inserting the points can change any Voronoi assignment, up to the leak
/// budget.
template <int Dim>
Window<Dim> insertion_region(const ConvexBody<Dim>& body, double intensity, double epsilon,
                             std::initializer_list<Point<Dim>> points)
{
    const double reach = choose_margins(body, intensity, epsilon).outer;
    std::optional<Window<Dim>> region;
    for (const auto& x : points) {
        const Window<Dim> w(x.array() - reach, x.array() + reach);
        region = region ? region->merged(w) : w;
    }
    return *region;
}

/// Sampling window for eta around an insertion region.
template <int Dim>
Window<Dim> insertion_process_window(const ConvexBody<Dim>& body, double intensity, double epsilon,
                                     const Window<Dim>& region)
{
    const Margins m = choose_margins(body, intensity, epsilon);
    return region.inflated(m.process - m.outer);
}

/// D_x PV = PV(eta + delta_x) - PV(eta) on one realization.
///
/// One query set serves both configurations; inserting x is simulated by
/// comparing |y - x|^2 against the indexed nearest squared distance, so an x
/// that coincides with a point of eta yields exactly 0.
template <int Dim>
double add_one_cost(const ConvexBody<Dim>& body, double intensity, const PointSample<Dim>& sample,
                    const NnIndex<Dim>& index, const Point<Dim>& x, const ChaosOptions& options,
                    const RngStream& query_rng)
{
    const Window<Dim> region = insertion_region(body, intensity, options.epsilon, {x});
    if (!sample.window.contains(region))
        throw GeometryError("process window must contain the insertion region");
    const std::vector<std::uint8_t> in = detail::membership(body, sample.points);
    const double x_in = contains(body, x) ? 1.0 : 0.0;
    Generator gen(query_rng);
    const auto integral = integrate_box<1>(region, options.n_query, options.scheme, gen, [&](const Point<Dim>& y) {
        const Neighbor nb = index.nearest(y);
        if ((y - x).squaredNorm() < nb.squared_distance)
            return std::array<double, 1>{x_in - static_cast<double>(in[nb.index])};
        return std::array<double, 1>{0.0};
    });
    return integral[0].value;
}

/// D_{x1,x2} PV = PV(eta+d1+d2) - PV(eta+d1) - PV(eta+d2) + PV(eta) on one
/// realization, all four terms on the same query set.
template <int Dim>
double second_difference(const ConvexBody<Dim>& body, double intensity, const PointSample<Dim>& sample,
                         const NnIndex<Dim>& index, const Point<Dim>& x1, const Point<Dim>& x2,
                         const ChaosOptions& options, const RngStream& query_rng)
{
    const Window<Dim> region = insertion_region(body, intensity, options.epsilon, {x1, x2});
    if (!sample.window.contains(region))
        throw GeometryError("process window must contain the insertion region");
    const std::vector<std::uint8_t> in = detail::membership(body, sample.points);
    const double in1 = contains(body, x1) ? 1.0 : 0.0;
    const double in2 = contains(body, x2) ? 1.0 : 0.0;
    Generator gen(query_rng);
    const auto integral = integrate_box<1>(region, options.n_query, options.scheme, gen, [&](const Point<Dim>& y) {
        const Neighbor nb = index.nearest(y);
        const double d0 = nb.squared_distance;
        const double a0 = static_cast<double>(in[nb.index]);
        const double d1 = (y - x1).squaredNorm();
        const double d2 = (y - x2).squaredNorm();
        const double f1 = d1 < d0 ? in1 : a0;
        const double f2 = d2 < d0 ? in2 : a0;
        double best = d0, f12 = a0;
        if (d1 < best) {
            best = d1;
            f12 = in1;
        }
        if (d2 < best)
            f12 = in2;
        return std::array<double, 1>{f12 - f1 - f2 + a0};
    });
    return integral[0].value;
}

namespace detail {

template <int Dim, class Difference>
KernelEstimate<Dim> average_over_realizations(const ConvexBody<Dim>& body, double intensity,
                                              const Window<Dim>& region, std::size_t n_outer,
                                              const ChaosOptions& options, std::uint64_t seed,
                                              std::uint64_t first_replication, Difference&& difference)
{
    if (n_outer < 2)
        throw std::invalid_argument("kernel estimates need n_outer >= 2");
    const Window<Dim> process = insertion_process_window(body, intensity, options.epsilon, region);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n_outer; ++i) {
        const std::uint64_t rep = first_replication + i;
        const PointSample<Dim> sample = sample_poisson(process, intensity, derive_stream(seed, rep, StreamRole::Process));
        double d = 0.0;
        if (!sample.empty()) {
            const NnIndex<Dim> index(sample);
            d = difference(sample, index, derive_stream(seed, rep, StreamRole::Query));
        }
        sum += d;
        sum_sq += d * d;
    }
    const double n = static_cast<double>(n_outer);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    KernelEstimate<Dim> out;
    out.estimate = mean;
    out.stderr_ = std::sqrt(var / n);
    out.n_outer = n_outer;
    return out;
}

}  // namespace detail

/// f_1(x) = E D_x PV, averaged over n_outer realizations of eta sampled
/// around x with replications first_replication, first_replication + 1, ...
template <int Dim>
KernelEstimate<Dim> estimate_f1(const ConvexBody<Dim>& body, double intensity, const Point<Dim>& x,
                                std::size_t n_outer, const ChaosOptions& options, std::uint64_t seed,
                                std::uint64_t first_replication)
{
    const Window<Dim> region = insertion_region(body, intensity, options.epsilon, {x});
    KernelEstimate<Dim> out = detail::average_over_realizations(
        body, intensity, region, n_outer, options, seed, first_replication,
        [&](const PointSample<Dim>& sample, const NnIndex<Dim>& index, const RngStream& rng) {
            return add_one_cost(body, intensity, sample, index, x, options, rng);
        });
    out.order = 1;
    out.x1 = x;
    return out;
}

/// f_2(x1, x2) = E D_{x1,x2} PV / 2.
template <int Dim>
KernelEstimate<Dim> estimate_f2(const ConvexBody<Dim>& body, double intensity, const Point<Dim>& x1,
                                const Point<Dim>& x2, std::size_t n_outer, const ChaosOptions& options,
                                std::uint64_t seed, std::uint64_t first_replication)
{
    if (x1 == x2)
        throw std::invalid_argument("estimate_f2 needs two distinct points");
    const Window<Dim> region = insertion_region(body, intensity, options.epsilon, {x1, x2});
    KernelEstimate<Dim> out = detail::average_over_realizations(
        body, intensity, region, n_outer, options, seed, first_replication,
        [&](const PointSample<Dim>& sample, const NnIndex<Dim>& index, const RngStream& rng) {
            return 0.5 * second_difference(body, intensity, sample, index, x1, x2, options, rng);
        });
    out.order = 2;
    out.x1 = x1;
    out.x2 = x2;
    return out;
}

/// Envelope values attached to a kernel estimate.
struct KernelEnvelope {
    double separation_bound;  ///< exp(-lambda kappa r^d) / ((n-1)! lambda)
    double depth_bound;       ///< 2 exp(-lambda kappa delta^d / 8^d) / (n! lambda), or +inf
    bool depth_applies;       ///< delta > 8 r
    double radius;            ///< smallest enclosing ball radius r
    double depth;             ///< delta, boundary distance of the ball center
};

template <int Dim>
KernelEnvelope kernel_envelope(const ConvexBody<Dim>& body, double intensity, const KernelEstimate<Dim>& k)
{
    KernelEnvelope env{};
    const Point<Dim> center = k.order == 1 ? k.x1 : Point<Dim>(0.5 * (k.x1 + k.x2));
    env.radius = k.order == 1 ? 0.0 : 0.5 * (k.x1 - k.x2).norm();
    env.depth = boundary_distance(body, center);
    env.separation_bound = kernel_bound_separation(Dim, intensity, k.order, env.radius);
    env.depth_applies = env.depth > 8.0 * env.radius;
    env.depth_bound = env.depth_applies ? kernel_bound_depth(Dim, intensity, k.order, env.depth)
                                        : std::numeric_limits<double>::infinity();
    return env;
}

struct FirstChaosNorm {
    double value = 0.0;   ///< lambda int f_1^2, debiased
    double stderr_ = 0.0;
    double support_radius = 0.0;  ///< x sampled within this distance of the boundary
    double sample_volume = 0.0;   ///< volume of the x-sampling box
    std::size_t n_eval = 0;
    std::size_t n_in_support = 0;
};

/// lambda int f_1(x)^2 dx by uniform x in the box around K dilated by the
/// support radius (the outer margin). Each squared estimate is debiased by
/// its own squared standard error. Points farther than the support radius
/// from the boundary count as f_1 = 0.
template <int Dim>
FirstChaosNorm first_chaos_norm(const ConvexBody<Dim>& body, double intensity, std::size_t n_eval,
                                std::size_t n_outer, const ChaosOptions& options, std::uint64_t seed,
                                std::uint64_t first_replication)
{
    if (n_eval < 2)
        throw std::invalid_argument("first_chaos_norm needs n_eval >= 2");
    FirstChaosNorm out;
    out.support_radius = choose_margins(body, intensity, options.epsilon).outer;
    const Window<Dim> box = dilated_window(body, out.support_radius);
    out.sample_volume = box.volume();
    out.n_eval = n_eval;

    Generator xgen(derive_stream(seed, first_replication, StreamRole::Chaos));
    const Point<Dim> extent = box.extent();
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t j = 0; j < n_eval; ++j) {
        Point<Dim> x;
        for (int k = 0; k < Dim; ++k)
            x[k] = box.lower[k] + extent[k] * xgen.uniform();
        double term = 0.0;
        if (boundary_distance(body, x) <= out.support_radius) {
            ++out.n_in_support;
            const auto f1 = estimate_f1(body, intensity, x, n_outer, options, seed,
                                        first_replication + 1 + j * n_outer);
            term = f1.estimate * f1.estimate - f1.stderr_ * f1.stderr_;
        }
        sum += term;
        sum_sq += term * term;
    }
    const double n = static_cast<double>(n_eval);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    out.value = intensity * out.sample_volume * mean;
    out.stderr_ = intensity * out.sample_volume * std::sqrt(var / n);
    return out;
}

/// Random probe pairs for f_2: midpoints uniform in the bounding box of K
/// inflated by 0.2, half-separations uniform in [0.05, 2] mean spacings.
template <int Dim>
std::vector<std::pair<Point<Dim>, Point<Dim>>> random_probe_pairs(const ConvexBody<Dim>& body, double intensity,
                                                                  std::size_t count, std::uint64_t seed)
{
    const Window<Dim> region = bounding_box(body).inflated(0.2);
    const double spacing = std::pow(intensity, -1.0 / Dim);
    Generator g(derive_stream(seed, 0, StreamRole::Chaos));
    std::vector<std::pair<Point<Dim>, Point<Dim>>> pairs;
    for (std::size_t k = 0; k < count; ++k) {
        Point<Dim> m, u;
        for (int i = 0; i < Dim; ++i) {
            m[i] = g.uniform(region.lower[i], region.upper[i]);
            u[i] = g.normal();
        }
        const double r = spacing * (0.05 + 1.95 * g.uniform());
        u *= r / u.norm();
        pairs.emplace_back(m - u, m + u);
    }
    return pairs;
}

}  // namespace pvlab

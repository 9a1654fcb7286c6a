#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "pvlab/geometry.hpp"
#include "pvlab/nn.hpp"
#include "pvlab/process.hpp"
#include "pvlab/query.hpp"
#include "pvlab/rng.hpp"

namespace pvlab {

inline constexpr double kDefaultLeakBudget = 1e-6;
inline constexpr double kDefaultQueryFactor = 64.0;

struct Margins {
    double outer;    ///< integration window margin around K
    double process;  ///< sampling window margin around K
};

/// Margins from the exponential decay of Voronoi cell reach.
///
/// With L = ln(C / eps) / (lambda kappa_d), C = max(1, lambda |K + B(0,1)|):
/// outer = 2 L^(1/d), process = outer + L^(1/d).
template <int Dim>
Margins choose_margins(const ConvexBody<Dim>& body, double intensity, double epsilon)
{
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("leak budget must lie in (0, 1)");
    if (!(intensity > 0.0))
        throw IntensityError("intensity must be > 0");
    const double c_leak = std::max(1.0, intensity * parallel_volume(body, 1.0));
    const double reach = std::pow(std::log(c_leak / epsilon) / (intensity * unit_ball_volume(Dim)), 1.0 / Dim);
    return {2.0 * reach, 3.0 * reach};
}

/// The nested integration and sampling windows W_out within W_proc.
template <int Dim>
struct Windows {
    Window<Dim> outer;
    Window<Dim> process;
};

template <int Dim>
Windows<Dim> estimation_windows(const ConvexBody<Dim>& body, double intensity, double epsilon)
{
    const Margins m = choose_margins(body, intensity, epsilon);
    return {dilated_window(body, m.outer), dilated_window(body, m.process)};
}

/// Query count used when none is configured: factor * lambda * |K|.
template <int Dim>
std::size_t default_query_count(const ConvexBody<Dim>& body, double intensity, double factor = kDefaultQueryFactor)
{
    return static_cast<std::size_t>(std::ceil(std::max(1.0, factor * intensity * volume(body))));
}

struct EstimatorOptions {
    std::size_t n_query = 0;  ///< 0 selects default_query_count
    QueryScheme scheme = QueryScheme::Uniform;
    double epsilon = kDefaultLeakBudget;
};

/// One Monte Carlo estimate for a single realization.
template <int Dim>
struct PvEstimate {
    double value = 0.0;
    double mc_stderr = 0.0;
    std::size_t n_query = 0;
    Window<Dim> outer;
    Window<Dim> process;
    double epsilon = kDefaultLeakBudget;
    bool no_nucleus_in_body = false;     ///< eta meets K nowhere
    bool no_nucleus_outside_body = false;  ///< eta misses K^C; truncation invalid

    bool degenerate() const { return no_nucleus_in_body || no_nucleus_outside_body; }
};

template <int Dim>
struct PvPair {
    PvEstimate<Dim> pv;
    PvEstimate<Dim> symdiff;
};

namespace detail {

template <int Dim>
std::vector<std::uint8_t> membership(const ConvexBody<Dim>& body, const PointList<Dim>& points)
{
    std::vector<std::uint8_t> in(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        in[i] = contains(body, points[i]) ? 1 : 0;
    return in;
}

}  // namespace detail

/// Estimates PV(K) = |{y : z(y, eta) in K}| and |A(K) sym-diff K| over W_out
/// from one shared query set.
template <int Dim>
PvPair<Dim> estimate_pv_symdiff(const ConvexBody<Dim>& body, double intensity, const PointSample<Dim>& sample,
                                const NnIndex<Dim>& index, const EstimatorOptions& options,
                                const RngStream& query_rng)
{
    if (sample.empty())
        throw EmptySampleError("estimate_pv needs a nonempty realization");
    const Windows<Dim> win = estimation_windows(body, intensity, options.epsilon);
    if (!sample.window.contains(win.outer))
        throw GeometryError("process window must contain the integration window");

    const std::vector<std::uint8_t> in = detail::membership(body, sample.points);
    std::size_t inside = 0;
    for (auto flag : in)
        inside += flag;

    const std::size_t n_query =
        options.n_query > 0 ? options.n_query : default_query_count(body, intensity);
    Generator gen(query_rng);
    const auto integrals = integrate_box<2>(win.outer, n_query, options.scheme, gen, [&](const Point<Dim>& y) {
        const bool assigned = in[index.nearest(y).index] != 0;
        const bool member = contains(body, y);
        return std::array<double, 2>{assigned ? 1.0 : 0.0, assigned != member ? 1.0 : 0.0};
    });

    PvPair<Dim> result{
        PvEstimate<Dim>{integrals[0].value, integrals[0].stderr_, effective_queries<Dim>(n_query, options.scheme),
                        win.outer, sample.window, options.epsilon, inside == 0, inside == sample.size()},
        PvEstimate<Dim>{integrals[1].value, integrals[1].stderr_, effective_queries<Dim>(n_query, options.scheme),
                        win.outer, sample.window, options.epsilon, inside == 0, inside == sample.size()}};
    return result;
}

template <int Dim>
PvEstimate<Dim> estimate_pv(const ConvexBody<Dim>& body, double intensity, const PointSample<Dim>& sample,
                            const NnIndex<Dim>& index, const EstimatorOptions& options, const RngStream& query_rng)
{
    return estimate_pv_symdiff(body, intensity, sample, index, options, query_rng).pv;
}

template <int Dim>
PvEstimate<Dim> estimate_symdiff(const ConvexBody<Dim>& body, double intensity, const PointSample<Dim>& sample,
                                 const NnIndex<Dim>& index, const EstimatorOptions& options,
                                 const RngStream& query_rng)
{
    return estimate_pv_symdiff(body, intensity, sample, index, options, query_rng).symdiff;
}

/// Outcome of one independent replication: sample, index, estimate.
struct ReplicationRecord {
    std::uint64_t replication = 0;
    double intensity = 0.0;
    double pv = 0.0;
    double symdiff = 0.0;
    double mc_stderr = 0.0;
    double symdiff_stderr = 0.0;
    std::size_t n_points = 0;
    std::size_t n_query = 0;
    bool degenerate = false;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;  ///< process stream id; the query stream is stream + 1
};

/// Samples eta on W_proc with (seed, replication), then estimates over W_out.
/// An empty realization yields PV = 0 and |A sym-diff K| = |K|, flagged.
template <int Dim>
ReplicationRecord simulate_replication(const ConvexBody<Dim>& body, double intensity, const EstimatorOptions& options,
                                       std::uint64_t seed, std::uint64_t replication)
{
    const Windows<Dim> win = estimation_windows(body, intensity, options.epsilon);
    const RngStream process_rng = derive_stream(seed, replication, StreamRole::Process);
    const RngStream query_rng = derive_stream(seed, replication, StreamRole::Query);
    const PointSample<Dim> sample = sample_poisson(win.process, intensity, process_rng);

    ReplicationRecord rec;
    rec.replication = replication;
    rec.intensity = intensity;
    rec.n_points = sample.size();
    rec.seed = seed;
    rec.stream = process_rng.stream;
    if (sample.empty()) {
        rec.symdiff = volume(body);
        rec.degenerate = true;
        return rec;
    }
    const NnIndex<Dim> index(sample);
    const PvPair<Dim> est = estimate_pv_symdiff(body, intensity, sample, index, options, query_rng);
    rec.pv = est.pv.value;
    rec.mc_stderr = est.pv.mc_stderr;
    rec.symdiff = est.symdiff.value;
    rec.symdiff_stderr = est.symdiff.mc_stderr;
    rec.n_query = est.pv.n_query;
    rec.degenerate = est.pv.degenerate();
    return rec;
}

}  // namespace pvlab

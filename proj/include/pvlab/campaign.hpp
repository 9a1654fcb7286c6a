#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pvlab/chaos.hpp"
#include "pvlab/estimator.hpp"
#include "pvlab/exact2d.hpp"
#include "pvlab/parallel.hpp"
#include "pvlab/stats.hpp"

namespace pvlab {

enum class EstimatorKind { MonteCarlo, Exact2d };

struct CampaignSettings {
    std::vector<double> lambdas;
    std::size_t replications = 100;
    EstimatorKind estimator = EstimatorKind::MonteCarlo;
    EstimatorOptions options;
    double query_factor = kDefaultQueryFactor;  ///< n_query = factor lambda |K| when options.n_query == 0
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

/// Summary of the R replications at one intensity.
struct LambdaSummary {
    double lambda = 0.0;
    std::vector<ReplicationRecord> records;
    Moments pv{};
    double var_se = 0.0;       ///< jackknife standard error of pv.variance
    double mc_var_mean = 0.0;  ///< mean squared internal query error
    double var_pv = 0.0;       ///< pv.variance - mc_var_mean, the realization variance
    double mean_se = 0.0;      ///< sqrt(pv.variance / R)
    double symdiff_mean = 0.0;
    std::optional<KsResult> ks_self;  ///< standardized by sample mean and deviation
    std::optional<KsResult> ks_raw;   ///< standardized by |K| and sqrt(var_pv)
    std::size_t n_degenerate = 0;
    double upper_shape = 0.0;   ///< sum_i kappa_{d-i} V_i(K) lambda^(-2+i/d)
    double upper_ratio = 0.0;   ///< var_pv / upper_shape, the fitted upper constant
    double lower_bound = 0.0;   ///< explicit first-chaos lower bound
    double normalized_var = 0.0;  ///< var_pv lambda^(1+1/d)
};

struct CampaignResult {
    int dim = 2;
    double body_volume = 0.0;
    std::uint64_t seed = 0;
    std::size_t replications = 0;
    std::vector<LambdaSummary> per_lambda;
    std::optional<ScalingFit> fit;  ///< log var_pv on log lambda, when >= 3 intensities
    double bracket_ratio = std::numeric_limits<double>::quiet_NaN();  ///< max/min normalized_var
};

namespace detail {

template <int Dim>
ReplicationRecord exact_replication(const ConvexBody<Dim>& body, double intensity, const EstimatorOptions& options,
                                    std::uint64_t seed, std::uint64_t replication)
{
    if constexpr (Dim != 2) {
        throw std::invalid_argument("the exact estimator exists only in the plane");
    } else {
        const Windows<2> win = estimation_windows(body, intensity, options.epsilon);
        const RngStream process_rng = derive_stream(seed, replication, StreamRole::Process);
        const PointSample<2> sample = sample_poisson(win.process, intensity, process_rng);
        const exact2d::ExactPv exact = exact2d::pv_exact(body, sample, win.outer);
        ReplicationRecord rec;
        rec.replication = replication;
        rec.intensity = intensity;
        rec.pv = exact.pv_area;
        rec.symdiff = exact.symdiff_area;
        rec.symdiff_stderr = 0.5 * (exact.symdiff_upper - exact.symdiff_lower);
        rec.n_points = sample.size();
        rec.degenerate = exact.degenerate();
        rec.seed = seed;
        rec.stream = process_rng.stream;
        return rec;
    }
}

template <int Dim>
double upper_shape(const ConvexBody<Dim>& body, double intensity)
{
    const auto v = intrinsic_volumes(body);
    double sum = 0.0;
    for (int i = 0; i < Dim; ++i)
        sum += unit_ball_volume(Dim - i) * v[i] * std::pow(intensity, -2.0 + static_cast<double>(i) / Dim);
    return sum;
}

}  // namespace detail

template <int Dim>
LambdaSummary summarize(const ConvexBody<Dim>& body, double intensity, std::vector<ReplicationRecord> records)
{
    LambdaSummary s;
    s.lambda = intensity;
    s.records = std::move(records);
    std::vector<double> pv;
    pv.reserve(s.records.size());
    for (const auto& r : s.records) {
        pv.push_back(r.pv);
        s.mc_var_mean += r.mc_stderr * r.mc_stderr;
        s.symdiff_mean += r.symdiff;
        s.n_degenerate += r.degenerate ? 1 : 0;
    }
    const double n = static_cast<double>(pv.size());
    s.mc_var_mean /= n;
    s.symdiff_mean /= n;
    s.pv = moments(pv);
    s.var_se = pv.size() >= 3 ? variance_jackknife_se(pv) : std::numeric_limits<double>::quiet_NaN();
    s.var_pv = s.pv.variance - s.mc_var_mean;
    s.mean_se = std::sqrt(s.pv.variance / n);
    if (pv.size() >= 50 && s.pv.variance > 0.0) {
        s.ks_self = ks_normal(standardize(pv, s.pv.mean, std::sqrt(s.pv.variance)));
        if (s.var_pv > 0.0)
            s.ks_raw = ks_normal(standardize(pv, volume(body), std::sqrt(s.var_pv)));
    }
    s.upper_shape = detail::upper_shape(body, intensity);
    s.upper_ratio = s.var_pv / s.upper_shape;
    s.lower_bound = first_chaos_lower_bound(body, intensity);
    s.normalized_var = s.var_pv * std::pow(intensity, 1.0 + 1.0 / Dim);
    return s;
}

/// R independent replications per intensity; replication k at intensity
/// index l uses streams derived from (seed, l R + k). Deterministic for any
/// thread count.
template <int Dim>
CampaignResult run_campaign(const ConvexBody<Dim>& body, const CampaignSettings& settings)
{
    if (settings.replications < 2)
        throw std::invalid_argument("a campaign needs at least 2 replications per intensity");
    if (settings.lambdas.empty())
        throw std::invalid_argument("a campaign needs at least one intensity");
    if (settings.estimator == EstimatorKind::Exact2d && Dim != 2)
        throw std::invalid_argument("the exact estimator exists only in the plane");

    CampaignResult result;
    result.dim = Dim;
    result.body_volume = volume(body);
    result.seed = settings.seed;
    result.replications = settings.replications;

    const std::size_t reps = settings.replications;
    const std::size_t total = reps * settings.lambdas.size();
    std::vector<ReplicationRecord> records(total);
    parallel_for(total, settings.threads, [&](std::size_t task) {
        const double lambda = settings.lambdas[task / reps];
        EstimatorOptions options = settings.options;
        if (options.n_query == 0)
            options.n_query = default_query_count(body, lambda, settings.query_factor);
        records[task] = settings.estimator == EstimatorKind::MonteCarlo
                            ? simulate_replication(body, lambda, options, settings.seed, task)
                            : detail::exact_replication(body, lambda, options, settings.seed, task);
    });

    for (std::size_t l = 0; l < settings.lambdas.size(); ++l) {
        std::vector<ReplicationRecord> slice(records.begin() + static_cast<std::ptrdiff_t>(l * reps),
                                             records.begin() + static_cast<std::ptrdiff_t>((l + 1) * reps));
        result.per_lambda.push_back(summarize(body, settings.lambdas[l], std::move(slice)));
    }

    if (settings.lambdas.size() >= 3) {
        std::vector<double> lam, var;
        bool positive = true;
        for (const auto& s : result.per_lambda) {
            lam.push_back(s.lambda);
            var.push_back(s.var_pv);
            positive = positive && s.var_pv > 0.0;
        }
        if (positive)
            result.fit = fit_scaling(lam, var);
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& s : result.per_lambda) {
        lo = std::min(lo, s.normalized_var);
        hi = std::max(hi, s.normalized_var);
    }
    if (lo > 0.0)
        result.bracket_ratio = hi / lo;
    return result;
}

struct SmallBodyRow {
    double scale = 0.0;         ///< r, with K_r = r K_0
    double variance = 0.0;      ///< sample variance of PV(K_r)
    double variance_se = 0.0;
    double mean = 0.0;
    double volume = 0.0;        ///< |K_r|
    double surface_term = 0.0;  ///< V_{d-1}(K_r)
    std::size_t n_empty = 0;    ///< replications with no nucleus in K_r
    bool lower_bound_regime = false;  ///< lambda >= (2 / r_K)^d
};

struct SmallBodyResult {
    double lambda = 0.0;
    std::size_t replications = 0;
    std::vector<SmallBodyRow> rows;
    double variance_slope = std::numeric_limits<double>::quiet_NaN();  ///< over the smallest decade of r
    double surface_slope = std::numeric_limits<double>::quiet_NaN();
    std::size_t decade_rows = 0;
};

namespace detail {

/// PV(K) for one realization: zero when no nucleus lies in K, otherwise the
/// exact cell areas in the plane or the query estimate elsewhere.
template <int Dim>
double small_body_pv(const ConvexBody<Dim>& body, double intensity, const EstimatorOptions& options,
                     EstimatorKind kind, std::uint64_t seed, std::uint64_t replication, bool& empty)
{
    const Windows<Dim> win = estimation_windows(body, intensity, options.epsilon);
    const PointSample<Dim> sample =
        sample_poisson(win.process, intensity, derive_stream(seed, replication, StreamRole::Process));
    std::vector<std::size_t> inside;
    for (std::size_t i = 0; i < sample.size(); ++i)
        if (contains(body, sample.points[i]))
            inside.push_back(i);
    empty = inside.empty();
    if (empty)
        return 0.0;
    if constexpr (Dim == 2) {
        if (kind == EstimatorKind::Exact2d) {
            double area = 0.0;
            // one cell at a time is cheaper only for a handful of nuclei
            if (inside.size() <= 8) {
                for (std::size_t i : inside)
                    area += exact2d::voronoi_cell(sample.points, i, win.outer).area;
            } else {
                const auto cells = exact2d::voronoi_cells_clipped(sample.points, win.outer);
                for (std::size_t i : inside)
                    area += cells[i].area;
            }
            return area;
        }
    }
    const NnIndex<Dim> index(sample);
    return estimate_pv(body, intensity, sample, index, options, derive_stream(seed, replication, StreamRole::Query))
        .value;
}

}  // namespace detail

/// Variance of PV(r K_0) at fixed lambda along a decreasing grid of r.
template <int Dim>
SmallBodyResult small_body_experiment(const ConvexBody<Dim>& base, const std::vector<double>& scales, double intensity,
                                      std::size_t replications, EstimatorKind kind, const EstimatorOptions& options,
                                      std::uint64_t seed, unsigned threads)
{
    if (scales.size() < 2)
        throw std::invalid_argument("small-body experiment needs at least two scales");
    for (std::size_t i = 1; i < scales.size(); ++i)
        if (!(scales[i] < scales[i - 1]))
            throw std::invalid_argument("small-body scales must be strictly decreasing");
    if (replications < 3)
        throw std::invalid_argument("small-body experiment needs at least 3 replications");
    if (kind == EstimatorKind::Exact2d && Dim != 2)
        throw std::invalid_argument("the exact estimator exists only in the plane");

    SmallBodyResult result;
    result.lambda = intensity;
    result.replications = replications;
    const double base_surface = intrinsic_volumes(base)[Dim - 1];
    for (std::size_t s = 0; s < scales.size(); ++s) {
        const ConvexBody<Dim> body = scaled(base, scales[s]);
        EstimatorOptions opt = options;
        if (opt.n_query == 0)
            opt.n_query = std::max<std::size_t>(4096, default_query_count(body, intensity));
        std::vector<double> pv(replications);
        std::vector<std::uint8_t> empty(replications);
        parallel_for(replications, threads, [&](std::size_t k) {
            bool e = false;
            pv[k] = detail::small_body_pv(body, intensity, opt, kind, seed, s * replications + k, e);
            empty[k] = e ? 1 : 0;
        });
        SmallBodyRow row;
        row.scale = scales[s];
        const Moments m = moments(pv);
        row.variance = m.variance;
        row.variance_se = variance_jackknife_se(pv);
        row.mean = m.mean;
        row.volume = volume(body);
        row.surface_term = std::pow(scales[s], Dim - 1) * base_surface;
        for (auto e : empty)
            row.n_empty += e;
        row.lower_bound_regime = intensity >= std::pow(2.0 / inradius(body), Dim);
        result.rows.push_back(row);
    }

    const double smallest = scales.back();
    std::vector<double> r, var, surf;
    for (const auto& row : result.rows)
        if (row.scale <= 10.0 * smallest * (1.0 + 1e-12)) {
            r.push_back(row.scale);
            var.push_back(row.variance);
            surf.push_back(row.surface_term);
        }
    result.decade_rows = r.size();
    if (r.size() >= 2) {
        bool positive = true;
        for (double v : var)
            positive = positive && v > 0.0;
        auto slope = [](const std::vector<double>& x, const std::vector<double>& y) {
            if (x.size() >= 3)
                return fit_scaling(x, y).slope;
            return std::log(y.back() / y.front()) / std::log(x.back() / x.front());
        };
        if (positive)
            result.variance_slope = slope(r, var);
        result.surface_slope = slope(r, surf);
    }
    return result;
}

}  // namespace pvlab

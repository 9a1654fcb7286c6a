#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "pvlab/rng.hpp"
#include "pvlab/types.hpp"

namespace pvlab {

enum class QueryScheme {
    Uniform,   ///< n i.i.d. uniform points
    Jittered,  ///< two uniform points in each cell of a regular grid
};

/// Monte Carlo integral over a box: value and its sampling standard error.
struct Integral {
    double value = 0.0;
    double stderr_ = 0.0;
};

/// Number of grid cells per axis used by the jittered scheme for n queries.
template <int Dim>
std::size_t jitter_cells_per_axis(std::size_t n_query)
{
    auto m = static_cast<std::size_t>(std::floor(std::pow(0.5 * static_cast<double>(n_query), 1.0 / Dim) + 1e-9));
    return m < 1 ? 1 : m;
}

/// Queries actually drawn for a nominal n_query under the given scheme.
template <int Dim>
std::size_t effective_queries(std::size_t n_query, QueryScheme scheme)
{
    if (scheme == QueryScheme::Uniform)
        return n_query;
    std::size_t cells = 1;
    for (int k = 0; k < Dim; ++k)
        cells *= jitter_cells_per_axis<Dim>(n_query);
    return 2 * cells;
}

/// Integrates K real-valued integrands over `region` with a shared query set.
///
/// f(y) returns std::array<double, K>. Uniform: value = |W| mean(g),
/// stderr^2 = |W|^2 (mean(g^2) - mean(g)^2) / n. Jittered: with pairs (a, b)
/// per cell of volume v, value = sum v (a + b) / 2 and
/// stderr^2 = sum v^2 (a - b)^2 / 4, an unbiased variance estimate.
template <std::size_t K, int Dim, class F>
std::array<Integral, K> integrate_box(const Window<Dim>& region, std::size_t n_query, QueryScheme scheme,
                                      Generator& gen, F&& f)
{
    std::array<Integral, K> out{};
    const Point<Dim> extent = region.extent();
    const double vol = region.volume();

    if (scheme == QueryScheme::Uniform) {
        std::array<double, K> sum{}, sum_sq{};
        Point<Dim> y;
        for (std::size_t i = 0; i < n_query; ++i) {
            for (int k = 0; k < Dim; ++k)
                y[k] = region.lower[k] + extent[k] * gen.uniform();
            const std::array<double, K> g = f(y);
            for (std::size_t c = 0; c < K; ++c) {
                sum[c] += g[c];
                sum_sq[c] += g[c] * g[c];
            }
        }
        const double n = static_cast<double>(n_query);
        for (std::size_t c = 0; c < K; ++c) {
            const double mean = sum[c] / n;
            const double var = std::max(0.0, sum_sq[c] / n - mean * mean);
            out[c].value = vol * mean;
            out[c].stderr_ = vol * std::sqrt(var / n);
        }
        return out;
    }

    const std::size_t m = jitter_cells_per_axis<Dim>(n_query);
    const Point<Dim> cell = extent / static_cast<double>(m);
    std::size_t cells = 1;
    for (int k = 0; k < Dim; ++k)
        cells *= m;
    const double cell_vol = vol / static_cast<double>(cells);

    std::array<double, K> sum{}, var{};
    std::array<std::size_t, Dim> idx{};
    Point<Dim> y;
    for (std::size_t s = 0; s < cells; ++s) {
        std::array<double, K> first{};
        for (int rep = 0; rep < 2; ++rep) {
            for (int k = 0; k < Dim; ++k)
                y[k] = region.lower[k] + cell[k] * (static_cast<double>(idx[k]) + gen.uniform());
            const std::array<double, K> g = f(y);
            for (std::size_t c = 0; c < K; ++c) {
                sum[c] += g[c];
                if (rep == 0) {
                    first[c] = g[c];
                } else {
                    const double d = first[c] - g[c];
                    var[c] += d * d;
                }
            }
        }
        // Row-major sweep keeps consecutive queries adjacent.
        for (int k = 0; k < Dim; ++k) {
            if (++idx[k] < m)
                break;
            idx[k] = 0;
        }
    }
    for (std::size_t c = 0; c < K; ++c) {
        out[c].value = 0.5 * cell_vol * sum[c];
        out[c].stderr_ = 0.5 * cell_vol * std::sqrt(var[c]);
    }
    return out;
}

}  // namespace pvlab

#pragma once

#include <stdexcept>

#include "pvlab/rng.hpp"
#include "pvlab/types.hpp"

namespace pvlab {

class IntensityError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// One realization of a homogeneous Poisson process restricted to a window.
template <int Dim>
struct PointSample {
    PointList<Dim> points;
    Window<Dim> window;
    double intensity;
    RngStream rng;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Expected point counts at or above this are refused.
inline constexpr double kMaxExpectedPoints = 2147483648.0;  // 2^31

/// Poisson(intensity * |window|) many i.i.d. uniform points in the window.
/// The draw is a pure function of rng.
template <int Dim>
PointSample<Dim> sample_poisson(const Window<Dim>& window, double intensity, const RngStream& rng)
{
    if (!(intensity > 0.0) || !std::isfinite(intensity))
        throw IntensityError("intensity must be finite and > 0");
    const double mean = intensity * window.volume();
    if (!(mean < kMaxExpectedPoints))
        throw IntensityError("intensity * window volume exceeds 2^31 expected points");

    Generator gen(rng);
    const auto count = gen.poisson(mean);
    PointSample<Dim> sample{PointList<Dim>(count), window, intensity, rng};
    const Point<Dim> extent = window.extent();
    for (auto& p : sample.points)
        for (int k = 0; k < Dim; ++k)
            p[k] = window.lower[k] + extent[k] * gen.uniform();
    return sample;
}

}  // namespace pvlab

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/StdVector>

namespace pvlab {

template <int Dim>
using Point = Eigen::Matrix<double, Dim, 1>;

template <int Dim>
using PointList = std::vector<Point<Dim>, Eigen::aligned_allocator<Point<Dim>>>;

/// Volume of the unit ball in R^k (kappa_k); kappa_0 = 1.
inline double unit_ball_volume(int k)
{
    return std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

inline double binomial(int n, int k)
{
    double b = 1.0;
    for (int i = 1; i <= k; ++i)
        b = b * (n - k + i) / i;
    return b;
}

class GeometryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Axis-aligned box, lower < upper componentwise.
template <int Dim>
struct Window {
    Point<Dim> lower;
    Point<Dim> upper;

    Window(const Point<Dim>& lo, const Point<Dim>& hi) : lower(lo), upper(hi)
    {
        if (!lower.allFinite() || !upper.allFinite() || !(lower.array() < upper.array()).all())
            throw GeometryError("window requires finite lower < upper on every axis");
    }

    double volume() const { return (upper - lower).prod(); }
    Point<Dim> extent() const { return upper - lower; }

    bool contains(const Point<Dim>& y) const
    {
        return (y.array() >= lower.array()).all() && (y.array() <= upper.array()).all();
    }

    bool contains(const Window& other) const
    {
        return (other.lower.array() >= lower.array()).all()
               && (other.upper.array() <= upper.array()).all();
    }

    Window inflated(double margin) const
    {
        return Window(lower.array() - margin, upper.array() + margin);
    }

    /// Smallest box holding both.
    Window merged(const Window& other) const
    {
        return Window(lower.cwiseMin(other.lower), upper.cwiseMax(other.upper));
    }

    EIGEN_MAKE_ALIGNED_OPERATOR_NEW
};

}  // namespace pvlab

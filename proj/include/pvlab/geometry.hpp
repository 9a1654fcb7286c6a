#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pvlab/types.hpp"

namespace pvlab {

enum class Shape { Ball, Box, Ellipse, Polygon };

std::string_view shape_name(Shape shape);

/// Compact convex body with nonempty interior.
///
/// Balls and axis-aligned boxes exist in every dimension; axis-aligned
/// ellipses and convex polygons only in the plane. Instances are immutable.
template <int Dim>
class ConvexBody {
public:
    static ConvexBody ball(const Point<Dim>& center, double radius)
    {
        if (!(radius > 0.0) || !std::isfinite(radius))
            throw GeometryError("ball radius must be finite and > 0");
        ConvexBody body(Shape::Ball, center);
        body.radius_ = radius;
        return body;
    }

    static ConvexBody box(const Point<Dim>& center, const Point<Dim>& half_widths)
    {
        if (!half_widths.allFinite() || !(half_widths.array() > 0.0).all())
            throw GeometryError("box half-widths must be finite and > 0");
        ConvexBody body(Shape::Box, center);
        body.half_widths_ = half_widths;
        return body;
    }

    static ConvexBody ellipse(const Point<Dim>& center, double a, double b)
        requires(Dim == 2)
    {
        if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
            throw GeometryError("ellipse semi-axes must be finite and > 0");
        ConvexBody body(Shape::Ellipse, center);
        body.half_widths_ = Point<Dim>(a, b);
        return body;
    }

    /// Counterclockwise convex polygon. Repeated vertices are merged; a
    /// vertex whose turn is below 1e-12 of the local edge scale is rejected
    /// as collinear.
    static ConvexBody polygon(const PointList<Dim>& vertices)
        requires(Dim == 2)
    {
        PointList<Dim> v;
        for (const auto& p : vertices) {
            if (!p.allFinite())
                throw GeometryError("polygon vertex is not finite");
            if (v.empty() || (p - v.back()).norm() > 1e-14)
                v.push_back(p);
        }
        while (v.size() > 1 && (v.front() - v.back()).norm() <= 1e-14)
            v.pop_back();
        if (v.size() < 3)
            throw GeometryError("polygon needs at least 3 distinct vertices");

        const std::size_t n = v.size();
        double turning = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Point<Dim> e0 = v[(i + 1) % n] - v[i];
            const Point<Dim> e1 = v[(i + 2) % n] - v[(i + 1) % n];
            const double cross = e0.x() * e1.y() - e0.y() * e1.x();
            const double scale = e0.norm() * e1.norm();
            if (std::abs(cross) < 1e-12 * scale)
                throw GeometryError("polygon has collinear consecutive vertices");
            if (cross < 0.0)
                throw GeometryError("polygon must be convex and counterclockwise");
            turning += std::atan2(cross, e0.dot(e1));
        }
        if (std::abs(turning - 2.0 * std::numbers::pi) > 1e-6)
            throw GeometryError("polygon winds more than once");

        ConvexBody body(Shape::Polygon, Point<Dim>::Zero());
        body.vertices_ = std::move(v);
        body.center_ = Point<Dim>::Zero();
        for (const auto& p : body.vertices_)
            body.center_ += p;
        body.center_ /= static_cast<double>(body.vertices_.size());
        return body;
    }

    Shape shape() const { return shape_; }
    int dim() const { return Dim; }
    const Point<Dim>& center() const { return center_; }
    double radius() const { return radius_; }
    const Point<Dim>& half_widths() const { return half_widths_; }
    double semi_axis_a() const { return half_widths_[0]; }
    double semi_axis_b() const { return half_widths_[1]; }
    const PointList<Dim>& vertices() const { return vertices_; }

    EIGEN_MAKE_ALIGNED_OPERATOR_NEW

private:
    ConvexBody(Shape shape, const Point<Dim>& center) : shape_(shape), center_(center)
    {
        if (!center.allFinite())
            throw GeometryError("body center is not finite");
        half_widths_.setZero();
    }

    Shape shape_;
    Point<Dim> center_;
    double radius_ = 0.0;
    Point<Dim> half_widths_;
    PointList<Dim> vertices_;
};

namespace detail {

inline double polygon_area(const PointList<2>& v)
{
    double twice = 0.0;
    for (std::size_t i = 0, n = v.size(); i < n; ++i) {
        const auto& p = v[i];
        const auto& q = v[(i + 1) % n];
        twice += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * twice;
}

inline double polygon_perimeter(const PointList<2>& v)
{
    double len = 0.0;
    for (std::size_t i = 0, n = v.size(); i < n; ++i)
        len += (v[(i + 1) % n] - v[i]).norm();
    return len;
}

inline double segment_distance(const Point<2>& y, const Point<2>& a, const Point<2>& b)
{
    const Point<2> ab = b - a;
    const double t = std::clamp((y - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (y - (a + t * ab)).norm();
}

/// Distance from (y0, y1) in the closed first quadrant to the ellipse with
/// semi-axes e0 >= e1. Newton on the Lagrange multiplier equation, kept
/// inside a shrinking bisection bracket.
inline double ellipse_quadrant_distance(double e0, double e1, double y0, double y1)
{
    if (y1 > 0.0) {
        if (y0 > 0.0) {
            const double z0 = y0 / e0;
            const double z1 = y1 / e1;
            const double g0 = z0 * z0 + z1 * z1 - 1.0;
            if (g0 == 0.0)
                return 0.0;
            const double r0 = (e0 / e1) * (e0 / e1);
            const double n0 = r0 * z0;
            auto residual = [&](double s) {
                const double a = n0 / (s + r0);
                const double b = z1 / (s + 1.0);
                return a * a + b * b - 1.0;
            };
            auto slope = [&](double s) {
                const double a = n0 / (s + r0);
                const double b = z1 / (s + 1.0);
                return -2.0 * (a * a / (s + r0) + b * b / (s + 1.0));
            };
            double lo = z1 - 1.0;
            double hi = g0 < 0.0 ? 0.0 : std::hypot(n0, z1) - 1.0;
            double s = lo;
            for (int iter = 0; iter < 60; ++iter) {
                const double g = residual(s);
                if (std::abs(g) < 1e-12)
                    break;
                if (g > 0.0)
                    lo = s;
                else
                    hi = s;
                double next = s - g / slope(s);
                if (!(next > lo && next < hi))
                    next = 0.5 * (lo + hi);
                if (next == s)
                    break;
                s = next;
            }
            const double x0 = r0 * y0 / (s + r0);
            const double x1 = y1 / (s + 1.0);
            return std::hypot(x0 - y0, x1 - y1);
        }
        return std::abs(y1 - e1);
    }
    const double numer0 = e0 * y0;
    const double denom0 = e0 * e0 - e1 * e1;
    if (numer0 < denom0) {
        const double xde0 = numer0 / denom0;
        const double x0 = e0 * xde0;
        const double x1 = e1 * std::sqrt(std::max(0.0, 1.0 - xde0 * xde0));
        return std::hypot(x0 - y0, x1);
    }
    return std::abs(y0 - e0);
}

/// Elementary symmetric polynomials e_0..e_n of the given values.
template <int Dim>
std::vector<double> elementary_symmetric(const Point<Dim>& values)
{
    std::vector<double> e(static_cast<std::size_t>(values.size()) + 1, 0.0);
    e[0] = 1.0;
    for (Eigen::Index k = 0; k < values.size(); ++k)
        for (Eigen::Index i = k + 1; i >= 1; --i)
            e[i] += e[i - 1] * values[k];
    return e;
}

/// Chebyshev center radius of a convex polygon. The optimum of the linear
/// program max t s.t. n_i.x + t <= c_i sits where three edge constraints are
/// active, so all triples are enumerated.
inline double polygon_inradius(const PointList<2>& v)
{
    const std::size_t n = v.size();
    std::vector<Eigen::Vector3d> rows(n);  // (n_x, n_y, c) with inward slack c - n.x
    for (std::size_t i = 0; i < n; ++i) {
        const Point<2> e = v[(i + 1) % n] - v[i];
        const Point<2> outward = Point<2>(e.y(), -e.x()).normalized();
        rows[i] = Eigen::Vector3d(outward.x(), outward.y(), outward.dot(v[i]));
    }
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) {
                Eigen::Matrix3d a;
                Eigen::Vector3d rhs;
                std::size_t idx[3] = {i, j, k};
                for (int r = 0; r < 3; ++r) {
                    a.row(r) << rows[idx[r]][0], rows[idx[r]][1], 1.0;
                    rhs[r] = rows[idx[r]][2];
                }
                const Eigen::FullPivLU<Eigen::Matrix3d> lu(a);
                if (!lu.isInvertible())
                    continue;
                const Eigen::Vector3d sol = lu.solve(rhs);
                const double t = sol[2];
                if (t <= best)
                    continue;
                bool feasible = true;
                for (const auto& row : rows)
                    if (row[0] * sol[0] + row[1] * sol[1] + t > row[2] + 1e-12 * (1.0 + std::abs(row[2])))
                        feasible = false;
                if (feasible)
                    best = t;
            }
    return best;
}

}  // namespace detail

template <int Dim>
double volume(const ConvexBody<Dim>& body)
{
    switch (body.shape()) {
    case Shape::Ball:
        return unit_ball_volume(Dim) * std::pow(body.radius(), Dim);
    case Shape::Box:
        return (2.0 * body.half_widths()).prod();
    case Shape::Ellipse:
        return std::numbers::pi * body.semi_axis_a() * body.semi_axis_b();
    case Shape::Polygon:
        if constexpr (Dim == 2)
            return detail::polygon_area(body.vertices());
    }
    return 0.0;
}

/// Perimeter of the axis-aligned ellipse, 4 a E(e) with a the major axis.
inline double ellipse_perimeter(double a, double b)
{
    const double major = std::max(a, b);
    const double minor = std::min(a, b);
    const double k = std::sqrt(1.0 - (minor / major) * (minor / major));
    return 4.0 * major * std::comp_ellint_2(k);
}

/// Intrinsic volumes [V_0, ..., V_Dim].
template <int Dim>
std::vector<double> intrinsic_volumes(const ConvexBody<Dim>& body)
{
    std::vector<double> v(Dim + 1, 0.0);
    switch (body.shape()) {
    case Shape::Ball:
        for (int i = 0; i <= Dim; ++i)
            v[i] = binomial(Dim, i) * unit_ball_volume(Dim) / unit_ball_volume(Dim - i)
                   * std::pow(body.radius(), i);
        break;
    case Shape::Box:
        v = detail::elementary_symmetric<Dim>(2.0 * body.half_widths());
        break;
    case Shape::Ellipse:
        v = {1.0, 0.5 * ellipse_perimeter(body.semi_axis_a(), body.semi_axis_b()), volume(body)};
        break;
    case Shape::Polygon:
        if constexpr (Dim == 2)
            v = {1.0, 0.5 * detail::polygon_perimeter(body.vertices()), volume(body)};
        break;
    }
    return v;
}

/// Volume of the parallel body K + B(0, r) by the Steiner polynomial.
template <int Dim>
double parallel_volume(const ConvexBody<Dim>& body, double r)
{
    const auto v = intrinsic_volumes(body);
    double sum = 0.0;
    for (int i = 0; i <= Dim; ++i)
        sum += unit_ball_volume(Dim - i) * v[i] * std::pow(r, Dim - i);
    return sum;
}

/// Closed-set membership; boundary points are inside.
template <int Dim>
bool contains(const ConvexBody<Dim>& body, const Point<Dim>& y)
{
    switch (body.shape()) {
    case Shape::Ball:
        return (y - body.center()).squaredNorm() <= body.radius() * body.radius();
    case Shape::Box:
        return ((y - body.center()).cwiseAbs().array() <= body.half_widths().array()).all();
    case Shape::Ellipse: {
        const Point<Dim> z = (y - body.center()).cwiseQuotient(body.half_widths());
        return z.squaredNorm() <= 1.0;
    }
    case Shape::Polygon:
        if constexpr (Dim == 2) {
            const auto& v = body.vertices();
            for (std::size_t i = 0, n = v.size(); i < n; ++i) {
                const Point<2> e = v[(i + 1) % n] - v[i];
                const Point<2> w = y - v[i];
                if (e.x() * w.y() - e.y() * w.x() < 0.0)
                    return false;
            }
            return true;
        }
    }
    return false;
}

/// Euclidean distance from y to the boundary, for y inside or outside.
template <int Dim>
double boundary_distance(const ConvexBody<Dim>& body, const Point<Dim>& y)
{
    switch (body.shape()) {
    case Shape::Ball:
        return std::abs((y - body.center()).norm() - body.radius());
    case Shape::Box: {
        const Point<Dim> gap = (y - body.center()).cwiseAbs() - body.half_widths();
        if ((gap.array() <= 0.0).all())
            return -gap.maxCoeff();
        return gap.cwiseMax(0.0).norm();
    }
    case Shape::Ellipse: {
        const Point<Dim> z = (y - body.center()).cwiseAbs();
        const double a = body.semi_axis_a();
        const double b = body.semi_axis_b();
        if (a >= b)
            return detail::ellipse_quadrant_distance(a, b, z[0], z[1]);
        return detail::ellipse_quadrant_distance(b, a, z[1], z[0]);
    }
    case Shape::Polygon:
        if constexpr (Dim == 2) {
            const auto& v = body.vertices();
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0, n = v.size(); i < n; ++i)
                best = std::min(best, detail::segment_distance(y, v[i], v[(i + 1) % n]));
            return best;
        }
    }
    return 0.0;
}

template <int Dim>
double inradius(const ConvexBody<Dim>& body)
{
    switch (body.shape()) {
    case Shape::Ball:
        return body.radius();
    case Shape::Box:
    case Shape::Ellipse:
        return body.half_widths().minCoeff();
    case Shape::Polygon:
        if constexpr (Dim == 2)
            return detail::polygon_inradius(body.vertices());
    }
    return 0.0;
}

template <int Dim>
Window<Dim> bounding_box(const ConvexBody<Dim>& body)
{
    switch (body.shape()) {
    case Shape::Ball:
        return Window<Dim>(body.center().array() - body.radius(),
                           body.center().array() + body.radius());
    case Shape::Box:
    case Shape::Ellipse:
        return Window<Dim>(body.center() - body.half_widths(), body.center() + body.half_widths());
    case Shape::Polygon:
        break;
    }
    Point<Dim> lo = body.vertices().front();
    Point<Dim> hi = lo;
    for (const auto& p : body.vertices()) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return Window<Dim>(lo, hi);
}

/// Bounding box of K inflated by margin on every side.
template <int Dim>
Window<Dim> dilated_window(const ConvexBody<Dim>& body, double margin)
{
    if (!(margin >= 0.0))
        throw GeometryError("window margin must be >= 0");
    return bounding_box(body).inflated(margin);
}

/// The image {s x : x in K}.
template <int Dim>
ConvexBody<Dim> scaled(const ConvexBody<Dim>& body, double s)
{
    if (!(s > 0.0))
        throw GeometryError("scale factor must be > 0");
    switch (body.shape()) {
    case Shape::Ball:
        return ConvexBody<Dim>::ball(s * body.center(), s * body.radius());
    case Shape::Box:
        return ConvexBody<Dim>::box(s * body.center(), s * body.half_widths());
    case Shape::Ellipse:
        if constexpr (Dim == 2)
            return ConvexBody<Dim>::ellipse(s * body.center(), s * body.semi_axis_a(),
                                            s * body.semi_axis_b());
        break;
    case Shape::Polygon:
        if constexpr (Dim == 2) {
            PointList<Dim> v = body.vertices();
            for (auto& p : v)
                p *= s;
            return ConvexBody<Dim>::polygon(v);
        }
        break;
    }
    return body;
}

}  // namespace pvlab

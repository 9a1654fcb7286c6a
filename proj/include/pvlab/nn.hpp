#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pvlab/process.hpp"
#include "pvlab/types.hpp"

namespace pvlab {

class EmptySampleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Neighbor {
    std::size_t index;
    double distance;
    double squared_distance;  ///< exact operand of the sqrt in distance
};

/// Linear-scan nearest point; ties go to the lowest index.
template <int Dim>
Neighbor nearest_bruteforce(const PointList<Dim>& points, const Point<Dim>& y)
{
    if (points.empty())
        throw EmptySampleError("nearest neighbor of an empty point set");
    std::size_t best = 0;
    double best_sq = (points[0] - y).squaredNorm();
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double sq = (points[i] - y).squaredNorm();
        if (sq < best_sq) {
            best_sq = sq;
            best = i;
        }
    }
    return {best, std::sqrt(best_sq), best_sq};
}

/// Immutable uniform-grid nearest-neighbor index.
///
/// Cell width is about (|W| / N)^(1/d), so each cell holds one point on
/// average. Queries walk Chebyshev rings around the (clamped) query cell and
/// stop once no unvisited ring can hold a point at or below the best
/// distance; results match nearest_bruteforce exactly, tie-break included.
template <int Dim>
class NnIndex {
public:
    static constexpr std::size_t kFlatScanBelow = 64;

    NnIndex(const PointList<Dim>& points, const Window<Dim>& window) : window_(window)
    {
        if (points.empty())
            throw EmptySampleError("cannot index an empty sample");
        const std::size_t n = points.size();

        // Grid box covers the window and every point, so clamping never
        // moves a point across cells.
        lower_ = window.lower;
        Point<Dim> upper = window.upper;
        for (const auto& p : points) {
            lower_ = lower_.cwiseMin(p);
            upper = upper.cwiseMax(p);
        }
        const Point<Dim> extent = (upper - lower_).cwiseMax(1e-300);

        flat_ = n < kFlatScanBelow;
        cell_width_ = flat_ ? extent.maxCoeff() : std::pow(extent.prod() / static_cast<double>(n), 1.0 / Dim);
        std::size_t total = 1;
        for (int k = 0; k < Dim; ++k) {
            const double cells = flat_ ? 1.0 : std::ceil(extent[k] / cell_width_);
            dims_[k] = static_cast<std::int64_t>(std::clamp(cells, 1.0, 1e6));
            total *= static_cast<std::size_t>(dims_[k]);
        }
        if (total > 8 * n + 64) {
            // Pathologically thin windows: fall back to one cell.
            flat_ = true;
            dims_.fill(1);
            total = 1;
        }
        stride_[0] = 1;
        for (int k = 1; k < Dim; ++k)
            stride_[k] = stride_[k - 1] * dims_[k - 1];

        std::vector<std::size_t> cell_of(n);
        start_.assign(total + 1, 0);
        for (std::size_t i = 0; i < n; ++i) {
            cell_of[i] = linear_cell(cell_coords(points[i]));
            ++start_[cell_of[i] + 1];
        }
        for (std::size_t c = 0; c < total; ++c)
            start_[c + 1] += start_[c];
        std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
        points_.resize(n);
        ids_.resize(n);
        // Ascending i within each cell keeps the lowest-index tie-break cheap.
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t slot = fill[cell_of[i]]++;
            points_[slot] = points[i];
            ids_[slot] = i;
        }
    }

    explicit NnIndex(const PointSample<Dim>& sample) : NnIndex(sample.points, sample.window) {}

    std::size_t size() const { return points_.size(); }
    const Window<Dim>& window() const { return window_; }

    Neighbor nearest(const Point<Dim>& y) const
    {
        double best_sq = std::numeric_limits<double>::infinity();
        std::size_t best = std::numeric_limits<std::size_t>::max();
        if (flat_) {
            scan_cell(0, y, best_sq, best);
            return {best, std::sqrt(best_sq), best_sq};
        }

        const auto center = cell_coords(y);
        std::int64_t max_ring = 0;
        for (int k = 0; k < Dim; ++k)
            max_ring = std::max({max_ring, center[k], dims_[k] - 1 - center[k]});

        for (std::int64_t ring = 0; ring <= max_ring; ++ring) {
            if (ring >= 2) {
                // Any cell at Chebyshev ring distance `ring` lies at least
                // (ring - 1) cell widths from y.
                const double bound = (static_cast<double>(ring - 1) - 1e-9) * cell_width_;
                if (bound * bound > best_sq)
                    break;
            }
            visit_ring(center, ring, y, best_sq, best);
        }
        return {best, std::sqrt(best_sq), best_sq};
    }

private:
    using Coords = std::array<std::int64_t, Dim>;

    Coords cell_coords(const Point<Dim>& y) const
    {
        Coords c;
        for (int k = 0; k < Dim; ++k) {
            const double t = std::floor((y[k] - lower_[k]) / cell_width_);
            c[k] = static_cast<std::int64_t>(std::clamp(t, 0.0, static_cast<double>(dims_[k] - 1)));
        }
        return c;
    }

    std::size_t linear_cell(const Coords& c) const
    {
        std::size_t idx = 0;
        for (int k = 0; k < Dim; ++k)
            idx += static_cast<std::size_t>(c[k] * stride_[k]);
        return idx;
    }

    void scan_cell(std::size_t cell, const Point<Dim>& y, double& best_sq, std::size_t& best) const
    {
        for (std::size_t s = start_[cell], e = start_[cell + 1]; s < e; ++s) {
            const double sq = (points_[s] - y).squaredNorm();
            if (sq < best_sq || (sq == best_sq && ids_[s] < best)) {
                best_sq = sq;
                best = ids_[s];
            }
        }
    }

    void visit_ring(const Coords& center, std::int64_t ring, const Point<Dim>& y, double& best_sq,
                    std::size_t& best) const
    {
        Coords lo, hi, c;
        for (int k = 0; k < Dim; ++k) {
            lo[k] = std::max<std::int64_t>(0, center[k] - ring);
            hi[k] = std::min<std::int64_t>(dims_[k] - 1, center[k] + ring);
            c[k] = lo[k];
        }
        for (;;) {
            bool on_shell = false;
            for (int k = 0; k < Dim; ++k)
                on_shell = on_shell || std::abs(c[k] - center[k]) == ring;
            if (on_shell) {
                scan_cell(linear_cell(c), y, best_sq, best);
            } else {
                // Jump over the interior along axis 0.
                const std::int64_t jump = center[0] + ring;
                if (jump <= hi[0] && c[0] < jump) {
                    c[0] = jump;
                    continue;
                }
            }
            int k = 0;
            while (k < Dim) {
                if (++c[k] <= hi[k])
                    break;
                c[k] = lo[k];
                ++k;
            }
            if (k == Dim)
                return;
        }
    }

    Window<Dim> window_;
    Point<Dim> lower_;
    double cell_width_ = 1.0;
    bool flat_ = false;
    Coords dims_{};
    Coords stride_{};
    std::vector<std::size_t> start_;
    PointList<Dim> points_;
    std::vector<std::size_t> ids_;
};

template <int Dim>
NnIndex<Dim> build_index(const PointSample<Dim>& sample)
{
    return NnIndex<Dim>(sample);
}

}  // namespace pvlab

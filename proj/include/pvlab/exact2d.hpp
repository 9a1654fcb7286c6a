#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "pvlab/geometry.hpp"
#include "pvlab/process.hpp"
#include "pvlab/types.hpp"

namespace pvlab::exact2d {

using Polygon = PointList<2>;

/// Sign of the orientation determinant: +1 if (a, b, c) turns left.
/// Floating-point filter with exact rational fallback.
int orient2d(const Point<2>& a, const Point<2>& b, const Point<2>& c);

/// +1 if d lies strictly inside the circle through counterclockwise a, b, c.
int incircle(const Point<2>& a, const Point<2>& b, const Point<2>& c, const Point<2>& d);

class CollinearSitesError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Delaunay triangulation of a planar site set.
struct Triangulation {
    PointList<2> sites;
    /// Counterclockwise site-index triples.
    std::vector<std::array<std::size_t, 3>> triangles;
    /// neighbors[t][i] is the triangle across the edge opposite vertex i,
    /// or kNoNeighbor on the convex hull.
    std::vector<std::array<std::size_t, 3>> neighbors;
    /// Hull vertices in counterclockwise order, collinear ones included.
    std::vector<std::size_t> hull;
    /// representative[i] is i unless site i repeats an earlier site.
    std::vector<std::size_t> representative;

    static constexpr std::size_t kNoNeighbor = static_cast<std::size_t>(-1);
};

/// Incremental Bowyer-Watson with ghost triangles for the hull. Sites
/// closer than 1e-14 to an inserted site are merged into it. Throws
/// CollinearSitesError when fewer than three sites are affinely independent.
Triangulation delaunay(const PointList<2>& sites);

/// Voronoi neighbor lists (by site index). Uses the Delaunay graph, or the
/// order along the line for collinear input.
std::vector<std::vector<std::size_t>> voronoi_neighbors(const PointList<2>& sites);

double polygon_area(const Polygon& polygon);

/// Part of a convex polygon with normal.x <= offset.
Polygon clip_halfplane(const Polygon& polygon, const Point<2>& normal, double offset);

/// Intersection of two convex polygons, the second counterclockwise.
Polygon clip_convex(const Polygon& subject, const Polygon& clip);

Polygon window_polygon(const Window<2>& window);

struct ClippedCell {
    std::size_t nucleus;
    Polygon polygon;
    double area;
    bool touches_window;
};

/// Voronoi cell of every site intersected with the clip window. Merged
/// duplicate sites receive an empty cell.
std::vector<ClippedCell> voronoi_cells_clipped(const PointList<2>& sites, const Window<2>& clip);

/// Voronoi cell of sites[site] within the clip window, from bisectors with
/// the other sites taken in order of distance until none can cut the cell.
ClippedCell voronoi_cell(const PointList<2>& sites, std::size_t site, const Window<2>& clip);

/// Polygon with n vertices on the boundary of a ball or ellipse (inscribed),
/// or with n edges tangent to it (circumscribed).
Polygon boundary_polygon(const ConvexBody<2>& body, std::size_t n, bool circumscribed);

inline constexpr std::size_t kCurvedBoundaryVertices = 4096;

struct ExactPv {
    double pv_area = 0.0;
    double symdiff_area = 0.0;   ///< midpoint of [symdiff_lower, symdiff_upper]
    double symdiff_lower = 0.0;  ///< equal to upper for polygonal bodies
    double symdiff_upper = 0.0;
    double clip_area = 0.0;
    double cell_area_sum = 0.0;
    bool no_nucleus_in_body = false;
    bool no_nucleus_outside_body = false;
    std::vector<ClippedCell> cells;
    std::vector<bool> nucleus_in_body;

    bool degenerate() const { return no_nucleus_in_body || no_nucleus_outside_body; }
};

/// Exact |A(K) cap clip| and |(A(K) sym-diff K) cap clip| from the clipped
/// Voronoi cells of the realization.
ExactPv pv_exact(const ConvexBody<2>& body, const PointList<2>& sites, const Window<2>& clip);

inline ExactPv pv_exact(const ConvexBody<2>& body, const PointSample<2>& sample, const Window<2>& clip)
{
    return pv_exact(body, sample.points, clip);
}

}  // namespace pvlab::exact2d

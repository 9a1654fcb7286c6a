#include "pvlab/exact2d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace pvlab::exact2d {

namespace {

constexpr int kGhost = -1;
constexpr double kDuplicateTolerance = 1e-14;

struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> n;
    bool alive = true;

    bool ghost() const { return v[2] == kGhost; }
};

/// Position along a Hilbert curve on a 2^16 grid, for insertion order.
std::uint64_t hilbert_key(std::uint32_t x, std::uint32_t y)
{
    std::uint64_t d = 0;
    for (std::uint32_t s = 1u << 15; s > 0; s >>= 1) {
        const std::uint32_t rx = (x & s) ? 1 : 0;
        const std::uint32_t ry = (y & s) ? 1 : 0;
        d += static_cast<std::uint64_t>(s) * s * ((3 * rx) ^ ry);
        if (ry == 0) {
            if (rx == 1) {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            std::swap(x, y);
        }
    }
    return d;
}

class Builder {
public:
    explicit Builder(const PointList<2>& sites) : sites_(sites) {}

    Triangulation run()
    {
        const std::size_t n = sites_.size();
        Triangulation out;
        out.sites = sites_;
        out.representative.resize(n);
        std::iota(out.representative.begin(), out.representative.end(), std::size_t{0});

        const std::vector<std::size_t> order = insertion_order();
        std::size_t first = 0, second = 0, third = 0;
        if (!find_initial(order, first, second, third))
            throw CollinearSitesError("Delaunay triangulation needs three non-collinear sites");

        make_initial(static_cast<int>(order[first]), static_cast<int>(order[second]),
                     static_cast<int>(order[third]));
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (k == first || k == second || k == third)
                continue;
            const int dup = insert(static_cast<int>(order[k]));
            if (dup >= 0)
                out.representative[order[k]] = static_cast<std::size_t>(dup);
        }

        std::vector<std::size_t> renumber(tris_.size(), Triangulation::kNoNeighbor);
        for (std::size_t t = 0; t < tris_.size(); ++t)
            if (tris_[t].alive && !tris_[t].ghost()) {
                renumber[t] = out.triangles.size();
                out.triangles.push_back({static_cast<std::size_t>(tris_[t].v[0]),
                                         static_cast<std::size_t>(tris_[t].v[1]),
                                         static_cast<std::size_t>(tris_[t].v[2])});
            }
        out.neighbors.reserve(out.triangles.size());
        int any_ghost = -1;
        for (std::size_t t = 0; t < tris_.size(); ++t) {
            if (!tris_[t].alive)
                continue;
            if (tris_[t].ghost()) {
                any_ghost = static_cast<int>(t);
                continue;
            }
            std::array<std::size_t, 3> nb{};
            for (int i = 0; i < 3; ++i)
                nb[i] = renumber[static_cast<std::size_t>(tris_[t].n[i])];
            out.neighbors.push_back(nb);
        }
        // Walk the ghost ring: ghost (a, b, inf) continues at the ghost
        // across its edge opposite a, which starts at b.
        int g = any_ghost;
        do {
            out.hull.push_back(static_cast<std::size_t>(tris_[g].v[1]));
            g = tris_[g].n[0];
        } while (g != any_ghost);
        std::reverse(out.hull.begin(), out.hull.end());
        return out;
    }

private:
    std::vector<std::size_t> insertion_order() const
    {
        const std::size_t n = sites_.size();
        Point<2> lo = sites_[0], hi = sites_[0];
        for (const auto& p : sites_) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        const Point<2> span = (hi - lo).cwiseMax(1e-300);
        std::vector<std::uint64_t> key(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Point<2> t = (sites_[i] - lo).cwiseQuotient(span) * 65535.0;
            key[i] = hilbert_key(static_cast<std::uint32_t>(t.x()), static_cast<std::uint32_t>(t.y()));
        }
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
        return order;
    }

    bool find_initial(const std::vector<std::size_t>& order, std::size_t& a, std::size_t& b, std::size_t& c) const
    {
        const std::size_t n = order.size();
        if (n < 3)
            return false;
        a = 0;
        b = n;
        for (std::size_t k = 1; k < n; ++k)
            if ((sites_[order[k]] - sites_[order[a]]).norm() > kDuplicateTolerance) {
                b = k;
                break;
            }
        if (b == n)
            return false;
        for (std::size_t k = 1; k < n; ++k) {
            if (k == b)
                continue;
            if (orient2d(sites_[order[a]], sites_[order[b]], sites_[order[k]]) != 0) {
                c = k;
                if (orient2d(sites_[order[a]], sites_[order[b]], sites_[order[c]]) < 0)
                    std::swap(b, c);
                return true;
            }
        }
        return false;
    }

    int new_tri(std::array<int, 3> v, std::array<int, 3> nb)
    {
        if (!free_.empty()) {
            const int t = free_.back();
            free_.pop_back();
            tris_[t] = Tri{v, nb, true};
            return t;
        }
        tris_.push_back(Tri{v, nb, true});
        stamp_.push_back(0);
        conflict_.push_back(false);
        return static_cast<int>(tris_.size() - 1);
    }

    void make_initial(int a, int b, int c)
    {
        const int t0 = new_tri({a, b, c}, {-1, -1, -1});
        const int gbc = new_tri({c, b, kGhost}, {-1, -1, t0});
        const int gca = new_tri({a, c, kGhost}, {-1, -1, t0});
        const int gab = new_tri({b, a, kGhost}, {-1, -1, t0});
        tris_[t0].n = {gbc, gca, gab};
        // Ghost (x, y, inf): across (y, inf) sits the ghost starting at y;
        // across (inf, x) the ghost ending at x.
        tris_[gbc].n[0] = gab;
        tris_[gbc].n[1] = gca;
        tris_[gca].n[0] = gbc;
        tris_[gca].n[1] = gab;
        tris_[gab].n[0] = gca;
        tris_[gab].n[1] = gbc;
        last_ = t0;
    }

    const Point<2>& site(int v) const { return sites_[static_cast<std::size_t>(v)]; }

    bool in_conflict(int t, const Point<2>& p) const
    {
        const Tri& tri = tris_[t];
        if (!tri.ghost())
            return incircle(site(tri.v[0]), site(tri.v[1]), site(tri.v[2]), p) > 0;
        const Point<2>& a = site(tri.v[0]);
        const Point<2>& b = site(tri.v[1]);
        const int o = orient2d(a, b, p);
        if (o != 0)
            return o > 0;
        return (p - a).dot(b - a) > 0.0 && (p - b).dot(a - b) > 0.0;
    }

    int locate(const Point<2>& p)
    {
        int t = last_;
        if (!tris_[t].alive)
            t = first_alive();
        if (tris_[t].ghost())
            t = tris_[t].n[2];
        std::uint32_t salt = 0x9E3779B9u;
        for (std::size_t steps = 0; steps < 4 * tris_.size() + 16; ++steps) {
            const Tri& tri = tris_[t];
            if (tri.ghost())
                return t;
            salt = salt * 1664525u + 1013904223u;
            const int start = static_cast<int>(salt >> 30) % 3;
            bool moved = false;
            for (int j = 0; j < 3; ++j) {
                const int i = (start + j) % 3;
                if (orient2d(site(tri.v[(i + 1) % 3]), site(tri.v[(i + 2) % 3]), p) < 0) {
                    t = tri.n[i];
                    moved = true;
                    break;
                }
            }
            if (!moved)
                return t;
        }
        // Walk did not settle; scan.
        for (std::size_t k = 0; k < tris_.size(); ++k)
            if (tris_[k].alive && in_conflict(static_cast<int>(k), p))
                return static_cast<int>(k);
        return t;
    }

    int first_alive() const
    {
        for (std::size_t k = 0; k < tris_.size(); ++k)
            if (tris_[k].alive)
                return static_cast<int>(k);
        return 0;
    }

    /// Returns the merged-into site for a duplicate, else -1.
    int insert(int pv)
    {
        const Point<2>& p = site(pv);
        const int start = locate(p);

        ++epoch_;
        cavity_.clear();
        boundary_.clear();
        stamp_[start] = epoch_;
        conflict_[start] = true;
        cavity_.push_back(start);
        for (std::size_t k = 0; k < cavity_.size(); ++k) {
            const int t = cavity_[k];
            for (int i = 0; i < 3; ++i) {
                const int nb = tris_[t].n[i];
                if (stamp_[nb] != epoch_) {
                    stamp_[nb] = epoch_;
                    conflict_[nb] = in_conflict(nb, p);
                    if (conflict_[nb])
                        cavity_.push_back(nb);
                }
                if (!conflict_[nb])
                    boundary_.push_back({t, i});
            }
        }

        for (int t : cavity_)
            for (int v : tris_[t].v)
                if (v != kGhost && (site(v) - p).norm() <= kDuplicateTolerance)
                    return v;

        struct Edge {
            int u, w, outside;
        };
        std::vector<Edge> edges;
        edges.reserve(boundary_.size());
        for (const auto& [t, i] : boundary_)
            edges.push_back({tris_[t].v[(i + 1) % 3], tris_[t].v[(i + 2) % 3], tris_[t].n[i]});
        // Freed slots are reused below, so read the cavity first.
        for (int t : cavity_) {
            tris_[t].alive = false;
            free_.push_back(t);
        }

        struct Fresh {
            int tri, u, w;
        };
        std::vector<Fresh> fresh;
        fresh.reserve(edges.size());
        for (const auto& [u, w, outside] : edges) {
            const int nt = new_tri({u, w, pv}, {-1, -1, outside});
            for (int j = 0; j < 3; ++j) {
                const int x = tris_[outside].v[j];
                if (x != u && x != w) {
                    tris_[outside].n[j] = nt;
                    break;
                }
            }
            fresh.push_back({nt, u, w});
        }
        for (const Fresh& f : fresh) {
            for (const Fresh& g : fresh) {
                if (g.u == f.w)
                    tris_[f.tri].n[0] = g.tri;
                if (g.w == f.u)
                    tris_[f.tri].n[1] = g.tri;
            }
        }
        for (const Fresh& f : fresh) {
            Tri& t = tris_[f.tri];
            if (t.v[0] == kGhost) {
                t.v = {t.v[1], t.v[2], t.v[0]};
                t.n = {t.n[1], t.n[2], t.n[0]};
            } else if (t.v[1] == kGhost) {
                t.v = {t.v[2], t.v[0], t.v[1]};
                t.n = {t.n[2], t.n[0], t.n[1]};
            }
            if (!t.ghost())
                last_ = f.tri;
        }
        return -1;
    }

    const PointList<2>& sites_;
    std::vector<Tri> tris_;
    std::vector<int> free_;
    std::vector<std::uint64_t> stamp_;
    std::vector<bool> conflict_;
    std::uint64_t epoch_ = 0;
    std::vector<int> cavity_;
    std::vector<std::pair<int, int>> boundary_;
    int last_ = 0;
};

bool on_window_boundary(const Point<2>& p, const Window<2>& w)
{
    const double tol = 1e-12 * (1.0 + w.extent().maxCoeff());
    return std::abs(p.x() - w.lower.x()) <= tol || std::abs(p.x() - w.upper.x()) <= tol
           || std::abs(p.y() - w.lower.y()) <= tol || std::abs(p.y() - w.upper.y()) <= tol;
}

}  // namespace

Triangulation delaunay(const PointList<2>& sites)
{
    for (const auto& p : sites)
        if (!p.allFinite())
            throw GeometryError("Delaunay site is not finite");
    return Builder(sites).run();
}

std::vector<std::vector<std::size_t>> voronoi_neighbors(const PointList<2>& sites)
{
    const std::size_t n = sites.size();
    std::vector<std::vector<std::size_t>> adj(n);
    auto link = [&](std::size_t a, std::size_t b) {
        if (a == b)
            return;
        adj[a].push_back(b);
        adj[b].push_back(a);
    };
    try {
        const Triangulation tri = delaunay(sites);
        for (const auto& t : tri.triangles)
            for (int i = 0; i < 3; ++i)
                link(t[i], t[(i + 1) % 3]);
        for (auto& list : adj) {
            std::sort(list.begin(), list.end());
            list.erase(std::unique(list.begin(), list.end()), list.end());
        }
        return adj;
    } catch (const CollinearSitesError&) {
    }
    // Collinear (or fewer than three distinct) sites: cells are slabs
    // between consecutive sites along the line.
    if (n < 2)
        return adj;
    std::size_t far = 0;
    for (std::size_t i = 1; i < n; ++i)
        if ((sites[i] - sites[0]).squaredNorm() > (sites[far] - sites[0]).squaredNorm())
            far = i;
    const Point<2> dir = sites[far] - sites[0];
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return (sites[a] - sites[0]).dot(dir) < (sites[b] - sites[0]).dot(dir);
    });
    std::size_t prev = order[0];
    for (std::size_t k = 1; k < n; ++k) {
        const std::size_t cur = order[k];
        if ((sites[cur] - sites[prev]).norm() <= kDuplicateTolerance)
            continue;  // duplicate: keeps no cell of its own
        link(prev, cur);
        prev = cur;
    }
    return adj;
}

double polygon_area(const Polygon& polygon)
{
    if (polygon.size() < 3)
        return 0.0;
    return detail::polygon_area(polygon);
}

Polygon clip_halfplane(const Polygon& polygon, const Point<2>& normal, double offset)
{
    Polygon out;
    const std::size_t n = polygon.size();
    if (n == 0)
        return out;
    out.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const Point<2>& p = polygon[i];
        const Point<2>& q = polygon[(i + 1) % n];
        const double sp = normal.dot(p) - offset;
        const double sq = normal.dot(q) - offset;
        if (sp <= 0.0)
            out.push_back(p);
        if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0))
            out.push_back(p + (sp / (sp - sq)) * (q - p));
    }
    if (out.size() < 3)
        out.clear();
    return out;
}

Polygon clip_convex(const Polygon& subject, const Polygon& clip)
{
    Polygon out = subject;
    const std::size_t n = clip.size();
    for (std::size_t i = 0; i < n && !out.empty(); ++i) {
        const Point<2> e = clip[(i + 1) % n] - clip[i];
        const Point<2> outward(e.y(), -e.x());
        out = clip_halfplane(out, outward, outward.dot(clip[i]));
    }
    return out;
}

Polygon window_polygon(const Window<2>& w)
{
    return Polygon{Point<2>(w.lower.x(), w.lower.y()), Point<2>(w.upper.x(), w.lower.y()),
                   Point<2>(w.upper.x(), w.upper.y()), Point<2>(w.lower.x(), w.upper.y())};
}

std::vector<ClippedCell> voronoi_cells_clipped(const PointList<2>& sites, const Window<2>& clip)
{
    if (sites.empty())
        throw GeometryError("voronoi_cells_clipped needs at least one site");
    const auto adj = voronoi_neighbors(sites);
    const Polygon box = window_polygon(clip);

    // Sites merged as duplicates appear in no Delaunay edge; give the cell
    // to the first occurrence only.
    std::vector<bool> owner(sites.size(), true);
    if (sites.size() > 1)
        for (std::size_t i = 0; i < sites.size(); ++i)
            if (adj[i].empty()) {
                for (std::size_t j = 0; j < i; ++j)
                    if ((sites[j] - sites[i]).norm() <= kDuplicateTolerance) {
                        owner[i] = false;
                        break;
                    }
            }

    std::vector<ClippedCell> cells;
    cells.reserve(sites.size());
    for (std::size_t i = 0; i < sites.size(); ++i) {
        ClippedCell cell{i, {}, 0.0, false};
        if (owner[i]) {
            Polygon poly = box;
            for (std::size_t j : adj[i]) {
                const Point<2> normal = sites[j] - sites[i];
                const Point<2> mid = 0.5 * (sites[i] + sites[j]);
                poly = clip_halfplane(poly, normal, normal.dot(mid));
                if (poly.empty())
                    break;
            }
            cell.polygon = std::move(poly);
            cell.area = polygon_area(cell.polygon);
            for (const auto& v : cell.polygon)
                cell.touches_window = cell.touches_window || on_window_boundary(v, clip);
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

ClippedCell voronoi_cell(const PointList<2>& sites, std::size_t site, const Window<2>& clip)
{
    if (site >= sites.size())
        throw std::out_of_range("voronoi_cell: site index out of range");
    const Point<2>& s = sites[site];
    std::vector<std::pair<double, std::size_t>> by_distance;
    by_distance.reserve(sites.size());
    for (std::size_t j = 0; j < sites.size(); ++j)
        if (j != site)
            by_distance.emplace_back((sites[j] - s).squaredNorm(), j);
    std::sort(by_distance.begin(), by_distance.end());

    ClippedCell cell{site, window_polygon(clip), 0.0, false};
    for (const auto& [sq, j] : by_distance) {
        if (sq <= kDuplicateTolerance * kDuplicateTolerance) {
            if (j < site) {
                cell.polygon.clear();  // a lower-index duplicate owns the cell
                break;
            }
            continue;
        }
        double reach_sq = 0.0;
        for (const auto& v : cell.polygon)
            reach_sq = std::max(reach_sq, (v - s).squaredNorm());
        // A site farther than twice the cell's reach cannot cut it.
        if (sq > 4.0 * reach_sq * (1.0 + 1e-12))
            break;
        const Point<2> normal = sites[j] - s;
        cell.polygon = clip_halfplane(cell.polygon, normal, normal.dot(0.5 * (s + sites[j])));
        if (cell.polygon.empty())
            break;
    }
    cell.area = polygon_area(cell.polygon);
    for (const auto& v : cell.polygon)
        cell.touches_window = cell.touches_window || on_window_boundary(v, clip);
    return cell;
}

Polygon boundary_polygon(const ConvexBody<2>& body, std::size_t n, bool circumscribed)
{
    if (n < 3)
        throw GeometryError("boundary polygon needs at least 3 vertices");
    if (body.shape() == Shape::Polygon)
        return body.vertices();
    if (body.shape() == Shape::Box)
        return window_polygon(bounding_box(body));
    const double a = body.shape() == Shape::Ball ? body.radius() : body.semi_axis_a();
    const double b = body.shape() == Shape::Ball ? body.radius() : body.semi_axis_b();
    const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
    // Tangent lines at parameters k*step meet at parameter (k + 1/2) step,
    // pushed out by 1/cos(step/2).
    const double shift = circumscribed ? 0.5 : 0.0;
    const double scale = circumscribed ? 1.0 / std::cos(0.5 * step) : 1.0;
    Polygon poly(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = (static_cast<double>(k) + shift) * step;
        poly[k] = body.center() + scale * Point<2>(a * std::cos(t), b * std::sin(t));
    }
    return poly;
}

ExactPv pv_exact(const ConvexBody<2>& body, const PointList<2>& sites, const Window<2>& clip)
{
    ExactPv out;
    out.clip_area = clip.volume();
    const double body_area = volume(body);
    if (sites.empty()) {
        out.no_nucleus_in_body = true;
        out.symdiff_area = out.symdiff_lower = out.symdiff_upper = body_area;
        return out;
    }

    out.cells = voronoi_cells_clipped(sites, clip);
    out.nucleus_in_body.resize(sites.size());
    std::size_t inside = 0;
    for (std::size_t i = 0; i < sites.size(); ++i) {
        out.nucleus_in_body[i] = contains(body, sites[i]);
        inside += out.nucleus_in_body[i] ? 1 : 0;
    }
    out.no_nucleus_in_body = inside == 0;
    out.no_nucleus_outside_body = inside == sites.size();

    const bool curved = body.shape() == Shape::Ball || body.shape() == Shape::Ellipse;
    const std::size_t n_boundary = curved ? kCurvedBoundaryVertices : 4;
    const Polygon inner = boundary_polygon(body, n_boundary, false);
    const Polygon outer = curved ? boundary_polygon(body, n_boundary, true) : inner;
    double overshoot = 0.0;
    if (curved) {
        const double r = std::max(bounding_box(body).extent().maxCoeff(), 1.0);
        overshoot = r * (1.0 / std::cos(std::numbers::pi / static_cast<double>(n_boundary)) - 1.0);
    }

    for (const ClippedCell& cell : out.cells) {
        out.cell_area_sum += cell.area;
        if (cell.polygon.empty())
            continue;
        const bool in = out.nucleus_in_body[cell.nucleus];
        if (in)
            out.pv_area += cell.area;

        const Point<2>& nucleus = sites[cell.nucleus];
        double reach = 0.0;
        for (const auto& v : cell.polygon)
            reach = std::max(reach, (v - nucleus).norm());
        if (boundary_distance(body, nucleus) > reach + overshoot + 1e-12)
            continue;  // cell lies on one side of the boundary

        const double with_inner = polygon_area(clip_convex(cell.polygon, inner));
        const double with_outer = curved ? polygon_area(clip_convex(cell.polygon, outer)) : with_inner;
        if (in) {
            out.symdiff_lower += cell.area - with_outer;
            out.symdiff_upper += cell.area - with_inner;
        } else {
            out.symdiff_lower += with_inner;
            out.symdiff_upper += with_outer;
        }
    }
    out.symdiff_area = 0.5 * (out.symdiff_lower + out.symdiff_upper);
    return out;
}

}  // namespace pvlab::exact2d

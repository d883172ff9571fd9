#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace newton_sic {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Point2() = default;
    constexpr Point2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
    constexpr Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
    constexpr Point2 operator-() const { return {-x, -y}; }
    constexpr Point2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Point2 operator/(double s) const { return {x / s, y / s}; }
    Point2& operator+=(const Point2& o) { x += o.x; y += o.y; return *this; }
    Point2& operator-=(const Point2& o) { x -= o.x; y -= o.y; return *this; }
    constexpr bool operator==(const Point2&) const = default;
};

using Vec2 = Point2;

constexpr Point2 operator*(double s, const Point2& p) { return p * s; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }
constexpr double norm2(const Vec2& v) { return dot(v, v); }
inline double distance(const Point2& a, const Point2& b) { return norm(a - b); }
constexpr Point2 midpoint(const Point2& a, const Point2& b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }
inline bool is_finite(const Point2& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// Twice the signed area of (a, b, c); positive for counter-clockwise turns.
constexpr double orient(const Point2& a, const Point2& b, const Point2& c) { return cross(b - a, c - a); }

struct Box {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;

    double width() const { return max_x - min_x; }
    double height() const { return max_y - min_y; }
    double area() const { return width() * height(); }
    Point2 center() const { return {0.5 * (min_x + max_x), 0.5 * (min_y + max_y)}; }
    bool contains(const Point2& p) const {
        return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
    }
    bool overlaps(const Box& o) const {
        return min_x <= o.max_x && o.min_x <= max_x && min_y <= o.max_y && o.min_y <= max_y;
    }
    Box expanded(double margin) const {
        return {min_x - margin, min_y - margin, max_x + margin, max_y + margin};
    }
    Box merged(const Box& o) const;
};

using Polygon = std::vector<Point2>;

double signed_area(std::span<const Point2> poly);
double polygon_area(std::span<const Point2> poly);
Box bounding_box(std::span<const Point2> pts);
Polygon ensure_ccw(Polygon poly);
Polygon box_polygon(const Box& box);
bool is_convex(std::span<const Point2> poly);

// True when no two non-adjacent edges touch and no adjacent edges fold back.
bool is_simple(std::span<const Point2> poly);

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b);

// Closed-polygon membership by crossing number; boundary points (within tol) count as inside.
bool polygon_contains(std::span<const Point2> poly, const Point2& p, double tol = 0.0);

// Distance from p to the polygon boundary, positive inside and negative outside.
double polygon_margin(std::span<const Point2> poly, const Point2& p);

// Distance from p to a closed convex polygon (0 when inside).
double convex_distance(std::span<const Point2> ccw_convex, const Point2& p);

// Sutherland-Hodgman clip of `subject` against a counter-clockwise convex polygon.
Polygon clip_convex(std::span<const Point2> subject, std::span<const Point2> ccw_convex);
Polygon clip_to_box(std::span<const Point2> subject, const Box& box);

// Area of the intersection of two convex polygons (either orientation).
double convex_overlap_area(std::span<const Point2> a, std::span<const Point2> b);

// Separating-axis test; true when the interiors may overlap by more than `tol` along every axis.
bool convex_polygons_overlap(std::span<const Point2> a, std::span<const Point2> b, double tol = 0.0);
bool convex_overlaps_box(std::span<const Point2> ccw_convex, const Box& box);

// Intersection of the infinite lines (p1,p2) and (q1,q2); nullopt when parallel within tolerance.
std::optional<Point2> line_intersection(const Point2& p1, const Point2& p2,
                                        const Point2& q1, const Point2& q2,
                                        double parallel_tol = 1e-14);

// Parameter t >= 0 along origin + t*dir where the ray meets segment [a, b]; nullopt if it misses.
std::optional<double> ray_segment_hit(const Point2& origin, const Vec2& dir,
                                      const Point2& a, const Point2& b);

// Ear-clipping triangulation of a simple polygon; throws invalid_geometry on failure.
std::vector<Polygon> triangulate(std::span<const Point2> poly);

// Decompose a simple polygon into counter-clockwise convex pieces.
std::vector<Polygon> convex_pieces(std::span<const Point2> poly);

// ---- union area and disjointness ---------------------------------------------------------

// exact_sweep: kinetic sweep in y, cost grows with the number of edge crossings.
// exact_boundary: clips every edge against the other pieces, cost grows with piece pairs.
// rasterization: horizontal strips with exact x-extents and a rigorous error bound.
enum class UnionMethod { exact_sweep, exact_boundary, rasterization };

struct AreaEstimate {
    double value = 0.0;
    double error = 0.0;
    UnionMethod method = UnionMethod::exact_sweep;
    std::size_t work = 0;  // sweep events or rasterized cells
};

struct Segment {
    Point2 a, b;
};

// Boundary of the union of simple polygons as the uncovered parts of their edges.
std::vector<Segment> union_boundary(std::span<const Polygon> polys);

// Area of the union of simple polygons. `resolution` is the strip height (rasterization only).
AreaEstimate union_area(std::span<const Polygon> polys, UnionMethod method, double resolution = 0.0);

struct DisjointReport {
    bool disjoint = true;
    double worst_overlap = 0.0;
    std::size_t first = 0;
    std::size_t second = 0;
    std::size_t pairs_checked = 0;
};

// Full pairwise check: interiors overlapping by more than `tol` in area fail.
DisjointReport verify_disjoint(std::span<const Polygon> polys, double tol);

// Checks only the listed index pairs.
DisjointReport verify_disjoint_pairs(std::span<const Polygon> polys,
                                     std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                     double tol);

}  // namespace newton_sic

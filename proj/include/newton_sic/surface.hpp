#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "newton_sic/doubling.hpp"
#include "newton_sic/errors.hpp"
#include "newton_sic/geometry.hpp"

namespace newton_sic {

// ---- shapes ----------------------------------------------------------------------------------

struct Disk {
    Point2 center;
    double radius = 1.0;
};

/// Intersection of the three disks of radius `radius` centred at `vertices`.
struct Reuleaux {
    std::array<Point2, 3> vertices;
    double radius = 1.0;
};

/// Union of simple polygons that may overlap; `area` is the measured union area.
struct MultiPolygon {
    std::vector<Polygon> parts;
    double area = 0.0;
};

using Shape = std::variant<Polygon, Disk, Reuleaux, MultiPolygon>;

/// Plane isometry z -> R(angle) * (reflect ? (z.x, -z.y) : z) + translation.
struct Isometry {
    double angle = 0.0;
    bool reflect = false;
    Vec2 translation;

    Vec2 linear(const Vec2& v) const;
    Point2 apply(const Point2& p) const { return linear(p) + translation; }
    static Isometry identity() { return {}; }
};

/// Point map x -> f(k x).
struct Similarity {
    double scale = 1.0;
    Isometry iso;
    Point2 apply(const Point2& p) const { return iso.apply(p * scale); }
};

bool shape_contains(const Shape& s, const Point2& p, double tol = 0.0);
/// Signed distance to the boundary (positive inside). For multi-polygons this is the best part
/// margin, a lower bound on the true distance for inside points.
double shape_margin(const Shape& s, const Point2& p);
double shape_area(const Shape& s);
Box shape_bbox(const Shape& s);
Shape shape_transform(const Shape& s, const Similarity& f);
/// Polygonal outline; arcs use `arc_segments` chords each. Multi-polygons return their first part.
Polygon shape_outline(const Shape& s, int arc_segments = 64);
/// Convex pieces covering a polygonal shape exactly (empty for curved shapes).
std::vector<Polygon> shape_convex_pieces(const Shape& s);
/// `count` points spread along the boundary (for multi-polygons, along part edges that are not shared).
std::vector<Point2> shape_boundary_points(const Shape& s, std::size_t count);
/// Parameters t >= 0 where origin + t * dir meets the shape boundary.
void shape_ray_crossings(const Shape& s, const Point2& origin, const Vec2& dir, std::vector<double>& out);
/// Box relation for curved shapes: -1 outside, 0 partial, +1 inside.
int shape_box_relation(const Shape& s, const Box& box);

// ---- formulas --------------------------------------------------------------------------------

/// u = (|x - focus|^2 - r0^2) / (2 focal); focal = r0 for the dimple paraboloid.
struct RadialParabola {
    Point2 focus;
    double r0 = 1.0;
    double focal = 1.0;
};

/// s = |normal . x - axis| + offset, u = (s^2 - r0^2) / (2 focal).
struct LinearParabola {
    Vec2 normal{1.0, 0.0};
    double axis = 0.0;
    double offset = 0.0;
    double r0 = 1.0;
    double focal = 1.0;
};

struct Flat {
    double level = 0.0;
};

/// u = slope (|x - apex| - radius); a test fixture that violates the gradient bound when slope >= 1.
struct Cone {
    Point2 apex;
    double slope = 1.0;
    double radius = 1.0;
};

using Generator = std::variant<RadialParabola, LinearParabola>;

struct MaxOf {
    std::vector<Generator> generators;
};

using Formula = std::variant<RadialParabola, LinearParabola, Flat, Cone, MaxOf>;

struct WholeDomain {};
/// Everything in the domain not claimed by another region.
struct Remainder {};

using Support = std::variant<Polygon, Disk, Reuleaux, MultiPolygon, WholeDomain, Remainder>;

struct Region {
    Formula formula;
    Support support;
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

double generator_value(const Generator& g, const Point2& p);
Vec2 generator_gradient(const Generator& g, const Point2& p);
/// Value and gradient-norm ranges of a generator over a convex polygon.
Range generator_value_range(const Generator& g, std::span<const Point2> convex);
Range generator_slope_range(const Generator& g, std::span<const Point2> convex);

/// Range of 1/(1+|grad u|^2) over a convex polygon; exact endpoints for the supported kinds.
Range integrand_range(const Formula& f, std::span<const Point2> convex);

const char* formula_kind(const Formula& f);

// ---- surfaces --------------------------------------------------------------------------------

struct SurfaceSample {
    Point2 point;
    double value = 0.0;
    std::optional<Vec2> gradient;
    int region = -1;  // -1 on the domain boundary
    bool regular = false;
};

struct SurfaceInfo {
    std::string construction;
    int n = 0;
    double a = 0.0;
    double d = 0.0;
    std::uint64_t seed = 0;
};

class ShapeIndex;

class Surface {
public:
    Surface(Shape domain, std::vector<Region> regions, double depth, SurfaceInfo info = {});
    ~Surface();
    Surface(const Surface&);
    Surface& operator=(const Surface&);
    Surface(Surface&&) noexcept;
    Surface& operator=(Surface&&) noexcept;

    const Shape& domain() const { return domain_; }
    const std::vector<Region>& regions() const { return regions_; }
    /// The flat depth c > 0.
    double depth() const { return depth_; }
    const SurfaceInfo& info() const { return info_; }
    SurfaceInfo& info() { return info_; }

    double area() const { return area_; }
    Box bbox() const { return bbox_; }

    bool contains(const Point2& p, double tol = tol::incidence) const;
    /// Lower bound on the distance to the domain boundary; negative outside.
    double domain_margin(const Point2& p) const;
    bool on_boundary(const Point2& p) const;

    /// Throws out_of_domain outside the closed domain.
    SurfaceSample eval(const Point2& p) const;
    /// Value only; nullopt outside the closed domain.
    std::optional<double> value_at(const Point2& p) const;
    /// Formula value of the owning region without the boundary value 0.
    std::optional<double> formula_value(const Point2& p) const;
    /// 1/(1+|grad u|^2) with the formula gradient of the owning region, ignoring ridges.
    double integrand(const Point2& p) const;

    /// Region boundary and domain boundary crossings along origin + t * dir; edges shared inside
    /// a multi-polygon union are skipped.
    std::vector<double> ray_crossings(const Point2& origin, const Vec2& dir) const;
    /// Domain boundary crossings only, unsorted.
    std::vector<double> domain_crossings(const Point2& origin, const Vec2& dir) const;

    /// Shape of a region support, or nullopt for WholeDomain and Remainder.
    std::optional<Shape> support_shape(std::size_t region) const;

private:
    struct Lookup {
        int region = -1;
        double margin = 0.0;
    };
    struct UnionBoundaries;

    Lookup locate(const Point2& p) const;
    void build();
    const UnionBoundaries& union_boundaries() const;

    Shape domain_;
    std::vector<Region> regions_;
    double depth_ = 0.0;
    SurfaceInfo info_;
    double area_ = 0.0;
    Box bbox_;
    std::unique_ptr<ShapeIndex> domain_index_;
    std::unique_ptr<ShapeIndex> region_index_;
    std::unique_ptr<UnionBoundaries> boundaries_;  // multi-polygon outlines, built on first use
    std::vector<int> pieceless_;  // WholeDomain / Remainder regions
};

/// Dimple u_ABC: paraboloid with focus B on the trapezoid, -c on the small triangle.
Surface dimple_surface(const BigTriangle& tri, double c);

/// Minimal admissible depth (1 - kappa^2) r0 / 2 of one triangle.
double dimple_min_depth(const BigTriangle& tri);

/// Surface on the union of all trapezoids and small triangles; c defaults to the minimal common depth.
Surface assemble(const DoublingFamily& family, std::optional<double> c = std::nullopt);

/// u~(f(k x)) = k u(x).
Surface scale_copy(const Surface& s, double k, const Isometry& iso);

/// lambda * u for lambda in (0, 1].
Surface shrink(const Surface& s, double lambda);

}  // namespace newton_sic

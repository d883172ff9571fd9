#include "newton_sic/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include "newton_sic/errors.hpp"

namespace newton_sic {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

double disk_margin(const Point2& c, double r, const Point2& p) { return r - distance(p, c); }

double reuleaux_margin(const Reuleaux& r, const Point2& p) {
    double m = kInf;
    for (const auto& v : r.vertices) m = std::min(m, disk_margin(v, r.radius, p));
    return m;
}

void circle_crossings(const Point2& c, double r, const Point2& o, const Vec2& d, std::vector<double>& out) {
    const double a = norm2(d);
    if (a == 0.0) return;
    const Vec2 w = o - c;
    const double b = dot(w, d);
    const double disc = b * b - a * (norm2(w) - r * r);
    if (disc < 0.0) return;
    const double s = std::sqrt(disc);
    for (double t : {(-b - s) / a, (-b + s) / a})
        if (t >= 0.0) out.push_back(t);
}

// Vertices within rounding distance of the ray report their own projection; intersecting a
// nearly parallel edge would place the crossing far from the vertex.
class EdgeCrossings {
public:
    EdgeCrossings(const Point2& o, const Vec2& d) : o_(o), dn_(norm(d)), u_(dn_ > 0.0 ? d / dn_ : Vec2{}) {}

    void edge(const Point2& a, const Point2& b, std::vector<double>& out) const {
        if (dn_ == 0.0) return;
        const double scale = std::max({std::abs(o_.x), std::abs(o_.y), std::abs(a.x), std::abs(a.y), std::abs(b.x),
                                       std::abs(b.y)});
        const double snap = 64.0 * std::numeric_limits<double>::epsilon() * scale;
        const double ha = cross(u_, a - o_), hb = cross(u_, b - o_);
        const bool on_a = std::abs(ha) <= snap, on_b = std::abs(hb) <= snap;
        if (on_a || on_b) {
            if (on_a) push(a, out);
            if (on_b) push(b, out);
            return;
        }
        if ((ha < 0.0) == (hb < 0.0)) return;
        push(a + (b - a) * (ha / (ha - hb)), out);
    }

private:
    void push(const Point2& p, std::vector<double>& out) const {
        const double t = dot(p - o_, u_) / dn_;
        if (t >= 0.0) out.push_back(t);
    }

    Point2 o_;
    double dn_;
    Vec2 u_;
};

void polygon_crossings(const Polygon& poly, const Point2& o, const Vec2& d, std::vector<double>& out) {
    const EdgeCrossings ec(o, d);
    for (std::size_t i = 0; i < poly.size(); ++i) ec.edge(poly[i], poly[(i + 1) % poly.size()], out);
}

void segment_crossings(const std::vector<Segment>& segs, const Point2& o, const Vec2& d, std::vector<double>& out) {
    const EdgeCrossings ec(o, d);
    for (const auto& s : segs) ec.edge(s.a, s.b, out);
}

// Endpoints of the arc of circle i of a Reuleaux triangle, as start angle and sweep.
std::pair<double, double> reuleaux_arc(const Reuleaux& r, int i) {
    const Point2& c = r.vertices[i];
    const Point2& p = r.vertices[(i + 1) % 3];
    const Point2& q = r.vertices[(i + 2) % 3];
    double a0 = std::atan2(p.y - c.y, p.x - c.x);
    double a1 = std::atan2(q.y - c.y, q.x - c.x);
    double sweep = a1 - a0;
    while (sweep <= -std::numbers::pi) sweep += 2.0 * std::numbers::pi;
    while (sweep > std::numbers::pi) sweep -= 2.0 * std::numbers::pi;
    return {a0, sweep};
}

}  // namespace

Vec2 Isometry::linear(const Vec2& v) const {
    const Vec2 w = reflect ? Vec2{v.x, -v.y} : v;
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * w.x - s * w.y, s * w.x + c * w.y};
}

// ---- shapes ----------------------------------------------------------------------------------

bool shape_contains(const Shape& s, const Point2& p, double tol) {
    return std::visit(overloaded{
                          [&](const Polygon& poly) { return polygon_contains(poly, p, tol); },
                          [&](const Disk& d) { return disk_margin(d.center, d.radius, p) >= -tol; },
                          [&](const Reuleaux& r) { return reuleaux_margin(r, p) >= -tol; },
                          [&](const MultiPolygon& m) {
                              return std::any_of(m.parts.begin(), m.parts.end(), [&](const Polygon& part) {
                                  return polygon_contains(part, p, tol);
                              });
                          },
                      },
                      s);
}

double shape_margin(const Shape& s, const Point2& p) {
    return std::visit(overloaded{
                          [&](const Polygon& poly) { return polygon_margin(poly, p); },
                          [&](const Disk& d) { return disk_margin(d.center, d.radius, p); },
                          [&](const Reuleaux& r) { return reuleaux_margin(r, p); },
                          [&](const MultiPolygon& m) {
                              double best = -kInf;
                              for (const auto& part : m.parts) best = std::max(best, polygon_margin(part, p));
                              return best;
                          },
                      },
                      s);
}

double shape_area(const Shape& s) {
    return std::visit(overloaded{
                          [](const Polygon& poly) { return polygon_area(poly); },
                          [](const Disk& d) { return std::numbers::pi * d.radius * d.radius; },
                          [](const Reuleaux& r) {
                              const double side = distance(r.vertices[0], r.vertices[1]);
                              // Equilateral triangle plus three circular segments of radius `radius`.
                              const double tri = std::sqrt(3.0) / 4.0 * side * side;
                              double segs = 0.0;
                              for (int i = 0; i < 3; ++i) {
                                  const double theta = std::abs(reuleaux_arc(r, i).second);
                                  segs += 0.5 * r.radius * r.radius * (theta - std::sin(theta));
                              }
                              return tri + segs;
                          },
                          [](const MultiPolygon& m) { return m.area; },
                      },
                      s);
}

Box shape_bbox(const Shape& s) {
    return std::visit(overloaded{
                          [](const Polygon& poly) { return bounding_box(poly); },
                          [](const Disk& d) {
                              return Box{d.center.x - d.radius, d.center.y - d.radius, d.center.x + d.radius,
                                         d.center.y + d.radius};
                          },
                          [](const Reuleaux& r) { return bounding_box(shape_outline(r, 256)).expanded(1e-12); },
                          [](const MultiPolygon& m) {
                              Box b = bounding_box(m.parts.front());
                              for (const auto& part : m.parts) b = b.merged(bounding_box(part));
                              return b;
                          },
                      },
                      s);
}

Shape shape_transform(const Shape& s, const Similarity& f) {
    auto map_poly = [&](const Polygon& poly) {
        Polygon out;
        out.reserve(poly.size());
        for (const auto& p : poly) out.push_back(f.apply(p));
        if (f.iso.reflect) std::reverse(out.begin(), out.end());
        return out;
    };
    return std::visit(overloaded{
                          [&](const Polygon& poly) -> Shape { return map_poly(poly); },
                          [&](const Disk& d) -> Shape { return Disk{f.apply(d.center), d.radius * f.scale}; },
                          [&](const Reuleaux& r) -> Shape {
                              Reuleaux out{{f.apply(r.vertices[0]), f.apply(r.vertices[1]), f.apply(r.vertices[2])},
                                           r.radius * f.scale};
                              return out;
                          },
                          [&](const MultiPolygon& m) -> Shape {
                              MultiPolygon out;
                              for (const auto& part : m.parts) out.parts.push_back(map_poly(part));
                              out.area = m.area * f.scale * f.scale;
                              return out;
                          },
                      },
                      s);
}

Polygon shape_outline(const Shape& s, int arc_segments) {
    arc_segments = std::max(arc_segments, 3);
    return std::visit(overloaded{
                          [](const Polygon& poly) { return ensure_ccw(poly); },
                          [&](const Disk& d) {
                              Polygon out;
                              for (int i = 0; i < arc_segments; ++i) {
                                  const double t = 2.0 * std::numbers::pi * i / arc_segments;
                                  out.push_back(d.center + Vec2{std::cos(t), std::sin(t)} * d.radius);
                              }
                              return out;
                          },
                          [&](const Reuleaux& r) {
                              Polygon out;
                              for (int i = 0; i < 3; ++i) {
                                  const auto [a0, sweep] = reuleaux_arc(r, i);
                                  for (int k = 0; k < arc_segments; ++k) {
                                      const double t = a0 + sweep * k / arc_segments;
                                      out.push_back(r.vertices[i] + Vec2{std::cos(t), std::sin(t)} * r.radius);
                                  }
                              }
                              return ensure_ccw(out);
                          },
                          [](const MultiPolygon& m) { return ensure_ccw(m.parts.front()); },
                      },
                      s);
}

std::vector<Polygon> shape_convex_pieces(const Shape& s) {
    if (const auto* poly = std::get_if<Polygon>(&s)) return convex_pieces(*poly);
    if (const auto* m = std::get_if<MultiPolygon>(&s)) {
        std::vector<Polygon> out;
        for (const auto& part : m->parts)
            for (auto& piece : convex_pieces(part)) out.push_back(std::move(piece));
        return out;
    }
    return {};
}

namespace {

std::vector<Point2> polygon_boundary_points(const Polygon& poly, std::size_t count) {
    std::vector<Point2> out;
    const std::size_t n = poly.size();
    double perimeter = 0.0;
    for (std::size_t i = 0; i < n; ++i) perimeter += distance(poly[i], poly[(i + 1) % n]);
    if (count == 0 || perimeter <= 0.0) return out;
    const double step = perimeter / static_cast<double>(count);
    double carry = 0.0;
    for (std::size_t i = 0; i < n && out.size() < count; ++i) {
        const Point2& a = poly[i];
        const Point2& b = poly[(i + 1) % n];
        const double len = distance(a, b);
        double pos = carry;
        while (pos < len && out.size() < count) {
            out.push_back(a + (b - a) * (pos / len));
            pos += step;
        }
        carry = pos - len;
    }
    return out;
}

}  // namespace

std::vector<Point2> shape_boundary_points(const Shape& s, std::size_t count) {
    return std::visit(
        overloaded{
            [&](const Polygon& poly) { return polygon_boundary_points(poly, count); },
            [&](const Disk& d) {
                std::vector<Point2> out;
                for (std::size_t i = 0; i < count; ++i) {
                    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
                    out.push_back(d.center + Vec2{std::cos(t), std::sin(t)} * d.radius);
                }
                return out;
            },
            [&](const Reuleaux& r) {
                std::vector<Point2> out;
                for (std::size_t k = 0; k < count; ++k) {
                    const int i = static_cast<int>(k % 3);
                    const auto [a0, sweep] = reuleaux_arc(r, i);
                    const double frac = (static_cast<double>(k / 3) + 0.5) / std::ceil(static_cast<double>(count) / 3.0);
                    const double t = a0 + sweep * frac;
                    out.push_back(r.vertices[i] + Vec2{std::cos(t), std::sin(t)} * r.radius);
                }
                return out;
            },
            [&](const MultiPolygon& m) {
                // Edge points that are not interior to the union.
                std::vector<Point2> out;
                const std::size_t per_part = std::max<std::size_t>(8, 4 * count / std::max<std::size_t>(1, m.parts.size()));
                for (const auto& part : m.parts) {
                    for (const auto& p : polygon_boundary_points(part, per_part)) {
                        const double rho = 1e-7;
                        int outside = 0;
                        for (int k = 0; k < 16; ++k) {
                            const double t = 2.0 * std::numbers::pi * k / 16.0;
                            const Point2 q = p + Vec2{std::cos(t), std::sin(t)} * rho;
                            bool in = false;
                            for (const auto& other : m.parts)
                                if (polygon_contains(other, q)) {
                                    in = true;
                                    break;
                                }
                            if (!in) ++outside;
                        }
                        if (outside > 0) out.push_back(p);
                        if (out.size() >= count) return out;
                    }
                }
                return out;
            },
        },
        s);
}

void shape_ray_crossings(const Shape& s, const Point2& origin, const Vec2& dir, std::vector<double>& out) {
    std::visit(overloaded{
                   [&](const Polygon& poly) { polygon_crossings(poly, origin, dir, out); },
                   [&](const Disk& d) { circle_crossings(d.center, d.radius, origin, dir, out); },
                   [&](const Reuleaux& r) {
                       for (const auto& v : r.vertices) circle_crossings(v, r.radius, origin, dir, out);
                   },
                   [&](const MultiPolygon& m) {
                       for (const auto& part : m.parts) polygon_crossings(part, origin, dir, out);
                   },
               },
               s);
}

namespace {

double box_distance(const Box& b, const Point2& p) {
    const double dx = std::max({b.min_x - p.x, 0.0, p.x - b.max_x});
    const double dy = std::max({b.min_y - p.y, 0.0, p.y - b.max_y});
    return std::hypot(dx, dy);
}

int disk_box_relation(const Point2& c, double r, const Box& b) {
    if (box_distance(b, c) >= r) return -1;
    for (const auto& corner : box_polygon(b))
        if (distance(corner, c) > r) return 0;
    return 1;
}

}  // namespace

int shape_box_relation(const Shape& s, const Box& box) {
    return std::visit(overloaded{
                          [&](const Disk& d) { return disk_box_relation(d.center, d.radius, box); },
                          [&](const Reuleaux& r) {
                              int rel = 1;
                              for (const auto& v : r.vertices) rel = std::min(rel, disk_box_relation(v, r.radius, box));
                              return rel;
                          },
                          [&](const auto& other) {
                              return shape_bbox(Shape(other)).overlaps(box) ? 0 : -1;
                          },
                      },
                      s);
}

// ---- formulas --------------------------------------------------------------------------------

namespace {

struct FormulaValue {
    double value = 0.0;
    Vec2 gradient;
    bool smooth = true;
};

FormulaValue eval_generator(const Generator& g, const Point2& p) {
    return std::visit(overloaded{
                          [&](const RadialParabola& r) {
                              const Vec2 v = p - r.focus;
                              return FormulaValue{(norm2(v) - r.r0 * r.r0) / (2.0 * r.focal), v / r.focal, true};
                          },
                          [&](const LinearParabola& l) {
                              const double w = dot(l.normal, p) - l.axis;
                              const double s = std::abs(w) + l.offset;
                              const double sign = w >= 0.0 ? 1.0 : -1.0;
                              return FormulaValue{(s * s - l.r0 * l.r0) / (2.0 * l.focal), l.normal * (sign * s / l.focal),
                                                  std::abs(w) > tol::ridge};
                          },
                      },
                      g);
}

FormulaValue eval_formula(const Formula& f, const Point2& p) {
    return std::visit(overloaded{
                          [&](const RadialParabola& r) { return eval_generator(r, p); },
                          [&](const LinearParabola& l) { return eval_generator(l, p); },
                          [&](const Flat& fl) { return FormulaValue{fl.level, {}, true}; },
                          [&](const Cone& c) {
                              const Vec2 v = p - c.apex;
                              const double r = norm(v);
                              const Vec2 g = r > 0.0 ? v * (c.slope / r) : Vec2{};
                              return FormulaValue{c.slope * (r - c.radius), g, r > tol::ridge};
                          },
                          [&](const MaxOf& m) {
                              FormulaValue best{-kInf, {}, true};
                              double second = -kInf;
                              for (const auto& g : m.generators) {
                                  const FormulaValue v = eval_generator(g, p);
                                  if (v.value > best.value) {
                                      second = best.value;
                                      best = v;
                                  } else {
                                      second = std::max(second, v.value);
                                  }
                              }
                              if (best.value - second <= tol::tie) best.smooth = false;
                              return best;
                          },
                      },
                      f);
}

Range radius_range(std::span<const Point2> convex, const Point2& c) {
    double hi = 0.0;
    for (const auto& v : convex) hi = std::max(hi, distance(v, c));
    return {convex_distance(convex, c), hi};
}

// Range of |w| + offset for w = normal . x - axis over the polygon.
Range linear_s_range(const LinearParabola& l, std::span<const Point2> convex) {
    double wlo = kInf, whi = -kInf;
    for (const auto& v : convex) {
        const double w = dot(l.normal, v) - l.axis;
        wlo = std::min(wlo, w);
        whi = std::max(whi, w);
    }
    Range a;
    if (wlo <= 0.0 && whi >= 0.0) a = {0.0, std::max(-wlo, whi)};
    else a = {std::min(std::abs(wlo), std::abs(whi)), std::max(std::abs(wlo), std::abs(whi))};
    return {a.lo + l.offset, a.hi + l.offset};
}

Range slope_to_integrand(Range g) { return {1.0 / (1.0 + g.hi * g.hi), 1.0 / (1.0 + g.lo * g.lo)}; }

}  // namespace

double generator_value(const Generator& g, const Point2& p) { return eval_generator(g, p).value; }
Vec2 generator_gradient(const Generator& g, const Point2& p) { return eval_generator(g, p).gradient; }

Range generator_value_range(const Generator& g, std::span<const Point2> convex) {
    return std::visit(overloaded{
                          [&](const RadialParabola& r) {
                              const Range rr = radius_range(convex, r.focus);
                              return Range{(rr.lo * rr.lo - r.r0 * r.r0) / (2.0 * r.focal),
                                           (rr.hi * rr.hi - r.r0 * r.r0) / (2.0 * r.focal)};
                          },
                          [&](const LinearParabola& l) {
                              const Range s = linear_s_range(l, convex);
                              return Range{(s.lo * s.lo - l.r0 * l.r0) / (2.0 * l.focal),
                                           (s.hi * s.hi - l.r0 * l.r0) / (2.0 * l.focal)};
                          },
                      },
                      g);
}

Range generator_slope_range(const Generator& g, std::span<const Point2> convex) {
    return std::visit(overloaded{
                          [&](const RadialParabola& r) {
                              const Range rr = radius_range(convex, r.focus);
                              return Range{rr.lo / r.focal, rr.hi / r.focal};
                          },
                          [&](const LinearParabola& l) {
                              const Range s = linear_s_range(l, convex);
                              return Range{s.lo / l.focal, s.hi / l.focal};
                          },
                      },
                      g);
}

Range integrand_range(const Formula& f, std::span<const Point2> convex) {
    return std::visit(overloaded{
                          [&](const RadialParabola& r) { return slope_to_integrand(generator_slope_range(r, convex)); },
                          [&](const LinearParabola& l) { return slope_to_integrand(generator_slope_range(l, convex)); },
                          [](const Flat&) { return Range{1.0, 1.0}; },
                          [](const Cone& c) {
                              const double v = 1.0 / (1.0 + c.slope * c.slope);
                              return Range{v, v};
                          },
                          [&](const MaxOf& m) {
                              std::vector<Range> values;
                              values.reserve(m.generators.size());
                              double floor = -kInf;
                              for (const auto& g : m.generators) {
                                  values.push_back(generator_value_range(g, convex));
                                  floor = std::max(floor, values.back().lo);
                              }
                              Range out{kInf, -kInf};
                              for (std::size_t i = 0; i < m.generators.size(); ++i) {
                                  if (values[i].hi < floor) continue;
                                  const Range r = slope_to_integrand(generator_slope_range(m.generators[i], convex));
                                  out.lo = std::min(out.lo, r.lo);
                                  out.hi = std::max(out.hi, r.hi);
                              }
                              return out;
                          },
                      },
                      f);
}

const char* formula_kind(const Formula& f) {
    return std::visit(overloaded{
                          [](const RadialParabola&) { return "radial-parabola"; },
                          [](const LinearParabola&) { return "linear-parabola"; },
                          [](const Flat&) { return "flat"; },
                          [](const Cone&) { return "cone"; },
                          [](const MaxOf&) { return "max-of"; },
                      },
                      f);
}

// ---- spatial index ---------------------------------------------------------------------------

class ShapeIndex {
public:
    struct Piece {
        int owner;
        Shape shape;
        Box box;
    };

    void add(int owner, Shape shape) {
        const Box b = shape_bbox(shape);
        pieces_.push_back({owner, std::move(shape), b});
    }

    void build() {
        if (pieces_.empty()) return;
        box_ = pieces_.front().box;
        for (const auto& p : pieces_) box_ = box_.merged(p.box);
        const double scale = std::max({box_.width(), box_.height(), 1e-300});
        pad_ = 1e-7 * scale;
        box_ = box_.expanded(2.0 * pad_);
        grid_ = std::clamp(static_cast<int>(std::ceil(2.0 * std::sqrt(static_cast<double>(pieces_.size())))), 1, 512);
        cells_.assign(static_cast<std::size_t>(grid_) * grid_, {});
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            const Box b = pieces_[i].box.expanded(pad_);
            const auto [x0, y0] = cell_of({b.min_x, b.min_y});
            const auto [x1, y1] = cell_of({b.max_x, b.max_y});
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    const Box cb = cell_box(x, y);
                    if (const auto* poly = std::get_if<Polygon>(&pieces_[i].shape);
                        poly && is_convex(*poly) && !convex_overlaps_box(ensure_ccw(*poly), cb.expanded(pad_)))
                        continue;
                    cells_[static_cast<std::size_t>(y) * grid_ + x].push_back(static_cast<int>(i));
                }
        }
    }

    const std::vector<int>& query(const Point2& p) const {
        static const std::vector<int> none;
        if (cells_.empty() || !box_.contains(p)) return none;
        const auto [x, y] = cell_of(p);
        return cells_[static_cast<std::size_t>(y) * grid_ + x];
    }

    const Piece& piece(int i) const { return pieces_[static_cast<std::size_t>(i)]; }
    std::size_t size() const { return pieces_.size(); }

private:
    std::pair<int, int> cell_of(const Point2& p) const {
        const double fx = (p.x - box_.min_x) / box_.width() * grid_;
        const double fy = (p.y - box_.min_y) / box_.height() * grid_;
        return {std::clamp(static_cast<int>(fx), 0, grid_ - 1), std::clamp(static_cast<int>(fy), 0, grid_ - 1)};
    }
    Box cell_box(int x, int y) const {
        const double w = box_.width() / grid_, h = box_.height() / grid_;
        return {box_.min_x + x * w, box_.min_y + y * h, box_.min_x + (x + 1) * w, box_.min_y + (y + 1) * h};
    }

    std::vector<Piece> pieces_;
    std::vector<std::vector<int>> cells_;
    Box box_;
    double pad_ = 0.0;
    int grid_ = 1;
};

// ---- surface ---------------------------------------------------------------------------------

namespace {

void validate_shape(const Shape& s, const char* what) {
    const std::string w(what);
    std::visit(overloaded{
                   [&](const Polygon& p) {
                       if (!is_simple(p)) throw Error(ErrorCode::invalid_geometry, w + " polygon is not simple");
                   },
                   [&](const Disk& d) {
                       if (!(d.radius > 0.0) || !is_finite(d.center))
                           throw Error(ErrorCode::invalid_geometry, w + " disk needs a positive radius");
                   },
                   [&](const Reuleaux& r) {
                       if (!(r.radius > 0.0)) throw Error(ErrorCode::invalid_geometry, w + " reuleaux needs a positive radius");
                       for (int i = 0; i < 3; ++i)
                           if (std::abs(distance(r.vertices[i], r.vertices[(i + 1) % 3]) - r.radius) >
                               tol::length_rel * r.radius)
                               throw Error(ErrorCode::invalid_geometry, w + " reuleaux vertices must be radius apart");
                   },
                   [&](const MultiPolygon& m) {
                       if (m.parts.empty() || !(m.area > 0.0))
                           throw Error(ErrorCode::invalid_geometry, w + " multipolygon needs parts and a positive area");
                       for (const auto& p : m.parts)
                           if (!is_simple(p)) throw Error(ErrorCode::invalid_geometry, w + " part is not simple");
                   },
               },
               s);
}

void validate_generator(const Generator& g) {
    std::visit(overloaded{
                   [](const RadialParabola& r) {
                       if (!(r.r0 > 0.0) || !(r.focal > 0.0) || !is_finite(r.focus))
                           throw Error(ErrorCode::invalid_parameter, "radial parabola needs r0 > 0 and focal > 0");
                   },
                   [](const LinearParabola& l) {
                       if (!(l.r0 > 0.0) || !(l.focal > 0.0) || !(l.offset >= 0.0))
                           throw Error(ErrorCode::invalid_parameter, "linear parabola needs r0, focal > 0 and offset >= 0");
                       if (std::abs(norm(l.normal) - 1.0) > 1e-12)
                           throw Error(ErrorCode::invalid_parameter, "linear parabola normal must be a unit vector");
                   },
               },
               g);
}

void validate_formula(const Formula& f) {
    std::visit(overloaded{
                   [](const RadialParabola& r) { validate_generator(r); },
                   [](const LinearParabola& l) { validate_generator(l); },
                   [](const Flat& fl) {
                       if (!(fl.level <= 0.0)) throw Error(ErrorCode::invalid_parameter, "flat level must be <= 0");
                   },
                   [](const Cone& c) {
                       if (!(c.slope > 0.0) || !(c.radius > 0.0))
                           throw Error(ErrorCode::invalid_parameter, "cone needs slope > 0 and radius > 0");
                   },
                   [](const MaxOf& m) {
                       if (m.generators.empty()) throw Error(ErrorCode::invalid_parameter, "max-of needs generators");
                       for (const auto& g : m.generators) validate_generator(g);
                   },
               },
               f);
}

std::optional<Shape> as_shape(const Support& s) {
    return std::visit(overloaded{
                          [](const Polygon& p) -> std::optional<Shape> { return Shape(p); },
                          [](const Disk& d) -> std::optional<Shape> { return Shape(d); },
                          [](const Reuleaux& r) -> std::optional<Shape> { return Shape(r); },
                          [](const MultiPolygon& m) -> std::optional<Shape> { return Shape(m); },
                          [](const auto&) -> std::optional<Shape> { return std::nullopt; },
                      },
                      s);
}

Support from_shape(Shape s) {
    return std::visit([](auto&& v) -> Support { return std::move(v); }, std::move(s));
}

}  // namespace

struct Surface::UnionBoundaries {
    std::once_flag once;
    std::vector<Segment> domain;
    std::vector<std::vector<Segment>> regions;  // multi-polygon supports only
};

Surface::Surface(Shape domain, std::vector<Region> regions, double depth, SurfaceInfo info)
    : domain_(std::move(domain)), regions_(std::move(regions)), depth_(depth), info_(std::move(info)) {
    build();
}

Surface::~Surface() = default;

Surface::Surface(const Surface& o) : domain_(o.domain_), regions_(o.regions_), depth_(o.depth_), info_(o.info_) {
    build();
}

Surface& Surface::operator=(const Surface& o) {
    if (this != &o) {
        Surface tmp(o);
        *this = std::move(tmp);
    }
    return *this;
}

Surface::Surface(Surface&&) noexcept = default;
Surface& Surface::operator=(Surface&&) noexcept = default;

void Surface::build() {
    validate_shape(domain_, "domain");
    if (!(depth_ > 0.0) || !std::isfinite(depth_)) throw Error(ErrorCode::invalid_parameter, "depth c must be positive");
    if (regions_.empty()) throw Error(ErrorCode::invalid_parameter, "surface needs at least one region");
    area_ = shape_area(domain_);
    bbox_ = shape_bbox(domain_);

    domain_index_ = std::make_unique<ShapeIndex>();
    if (const auto* m = std::get_if<MultiPolygon>(&domain_)) {
        for (const auto& part : m->parts) domain_index_->add(0, Shape(part));
        domain_index_->build();
    }

    region_index_ = std::make_unique<ShapeIndex>();
    boundaries_ = std::make_unique<UnionBoundaries>();
    pieceless_.clear();
    for (std::size_t r = 0; r < regions_.size(); ++r) {
        validate_formula(regions_[r].formula);
        const auto shape = as_shape(regions_[r].support);
        if (!shape) {
            pieceless_.push_back(static_cast<int>(r));
            continue;
        }
        validate_shape(*shape, "support");
        if (const auto* m = std::get_if<MultiPolygon>(&*shape)) {
            for (const auto& part : m->parts) region_index_->add(static_cast<int>(r), Shape(part));
        } else {
            region_index_->add(static_cast<int>(r), *shape);
        }
    }
    region_index_->build();
}

bool Surface::contains(const Point2& p, double tol) const {
    if (std::holds_alternative<MultiPolygon>(domain_)) {
        for (int i : domain_index_->query(p)) {
            const auto& poly = std::get<Polygon>(domain_index_->piece(i).shape);
            if (polygon_contains(poly, p, tol)) return true;
        }
        return false;
    }
    return shape_contains(domain_, p, tol);
}

double Surface::domain_margin(const Point2& p) const {
    if (!std::holds_alternative<MultiPolygon>(domain_)) return shape_margin(domain_, p);
    double best = -kInf;
    for (int i : domain_index_->query(p))
        best = std::max(best, polygon_margin(std::get<Polygon>(domain_index_->piece(i).shape), p));
    if (best == -kInf) return -std::max(bbox_.width(), bbox_.height());
    if (best < -tol::incidence || best > 2.0 * tol::ridge) return best;
    // Part boundaries inside the union are not domain boundary; probe a small circle.
    const double rho = 4.0 * tol::ridge;
    for (int k = 0; k < 32; ++k) {
        const double t = 2.0 * std::numbers::pi * k / 32.0;
        if (!contains(p + Vec2{std::cos(t), std::sin(t)} * rho, 0.0)) return best;
    }
    return std::max(best, 0.5 * rho);
}

bool Surface::on_boundary(const Point2& p) const {
    return contains(p, tol::incidence) && domain_margin(p) <= tol::incidence;
}

Surface::Lookup Surface::locate(const Point2& p) const {
    // Best margin per region among nearby pieces.
    thread_local std::vector<std::pair<int, double>> best;
    best.clear();
    for (int i : region_index_->query(p)) {
        const auto& piece = region_index_->piece(i);
        const double m = shape_margin(piece.shape, p);
        auto it = std::find_if(best.begin(), best.end(), [&](const auto& e) { return e.first == piece.owner; });
        if (it == best.end()) best.emplace_back(piece.owner, m);
        else it->second = std::max(it->second, m);
    }
    int claimed = -1;
    double claimed_margin = 0.0;
    for (const auto& [owner, m] : best) {
        if (m >= -tol::incidence && (claimed < 0 || owner < claimed)) {
            claimed = owner;
            claimed_margin = m;
        }
    }
    for (int r : pieceless_) {
        if (claimed >= 0 && claimed < r) break;
        if (std::holds_alternative<WholeDomain>(regions_[static_cast<std::size_t>(r)].support))
            return {r, domain_margin(p)};
        if (claimed < 0) {
            double m = domain_margin(p);
            for (const auto& [owner, mm] : best) m = std::min(m, -mm);
            return {r, m};
        }
    }
    return {claimed, claimed_margin};
}

SurfaceSample Surface::eval(const Point2& p) const {
    if (!is_finite(p) || !contains(p, tol::incidence))
        throw Error(ErrorCode::out_of_domain, "point outside the closed domain");
    SurfaceSample s;
    s.point = p;
    const double dm = domain_margin(p);
    if (dm <= tol::incidence) return s;
    const Lookup loc = locate(p);
    if (loc.region < 0) throw Error(ErrorCode::invalid_geometry, "point not covered by any region");
    const FormulaValue v = eval_formula(regions_[static_cast<std::size_t>(loc.region)].formula, p);
    s.value = v.value;
    s.region = loc.region;
    s.regular = v.smooth && std::min(dm, loc.margin) > tol::ridge;
    if (s.regular) s.gradient = v.gradient;
    return s;
}

std::optional<double> Surface::formula_value(const Point2& p) const {
    if (!is_finite(p) || !contains(p, tol::incidence)) return std::nullopt;
    const Lookup loc = locate(p);
    if (loc.region < 0) return std::nullopt;
    return eval_formula(regions_[static_cast<std::size_t>(loc.region)].formula, p).value;
}

std::optional<double> Surface::value_at(const Point2& p) const {
    if (!is_finite(p) || !contains(p, tol::incidence)) return std::nullopt;
    if (domain_margin(p) <= tol::incidence) return 0.0;
    const Lookup loc = locate(p);
    if (loc.region < 0) throw Error(ErrorCode::invalid_geometry, "point not covered by any region");
    return eval_formula(regions_[static_cast<std::size_t>(loc.region)].formula, p).value;
}

double Surface::integrand(const Point2& p) const {
    const Lookup loc = locate(p);
    if (loc.region < 0) throw Error(ErrorCode::invalid_geometry, "point not covered by any region");
    const Vec2 g = eval_formula(regions_[static_cast<std::size_t>(loc.region)].formula, p).gradient;
    return 1.0 / (1.0 + norm2(g));
}

const Surface::UnionBoundaries& Surface::union_boundaries() const {
    std::call_once(boundaries_->once, [this] {
        if (const auto* m = std::get_if<MultiPolygon>(&domain_)) boundaries_->domain = union_boundary(m->parts);
        boundaries_->regions.resize(regions_.size());
        for (std::size_t r = 0; r < regions_.size(); ++r)
            if (const auto* m = std::get_if<MultiPolygon>(&regions_[r].support))
                boundaries_->regions[r] = union_boundary(m->parts);
    });
    return *boundaries_;
}

std::vector<double> Surface::domain_crossings(const Point2& origin, const Vec2& dir) const {
    std::vector<double> out;
    if (std::holds_alternative<MultiPolygon>(domain_))
        segment_crossings(union_boundaries().domain, origin, dir, out);
    else
        shape_ray_crossings(domain_, origin, dir, out);
    return out;
}

std::vector<double> Surface::ray_crossings(const Point2& origin, const Vec2& dir) const {
    std::vector<double> out = domain_crossings(origin, dir);
    for (std::size_t i = 0; i < region_index_->size(); ++i) {
        const auto& piece = region_index_->piece(static_cast<int>(i));
        if (std::holds_alternative<MultiPolygon>(regions_[static_cast<std::size_t>(piece.owner)].support)) continue;
        shape_ray_crossings(piece.shape, origin, dir, out);
    }
    const auto& ub = union_boundaries();
    for (const auto& segs : ub.regions) segment_crossings(segs, origin, dir, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::optional<Shape> Surface::support_shape(std::size_t region) const {
    return as_shape(regions_.at(region).support);
}

// ---- constructions on surfaces ---------------------------------------------------------------

double dimple_min_depth(const BigTriangle& tri) {
    const double k = tri.kappa();
    return (1.0 - k * k) * tri.r0() / 2.0;
}

Surface dimple_surface(const BigTriangle& tri, double c) {
    tri.validate();
    const double cmin = dimple_min_depth(tri);
    if (!(c >= cmin * (1.0 - 1e-12)))
        throw Error(ErrorCode::invalid_parameter,
                    "depth c below the admissible threshold (1 - kappa^2) r0 / 2 = " + std::to_string(cmin));
    const double r0 = tri.r0();
    std::vector<Region> regions{
        {Flat{-c}, tri.small_triangle()},
        {RadialParabola{tri.b, r0, r0}, tri.trapezoid()},
    };
    return Surface(tri.outline(), std::move(regions), c, SurfaceInfo{"dimple", 0, tri.separating_length(), tri.trap_height(), 0});
}

Surface assemble(const DoublingFamily& family, std::optional<double> c) {
    if (family.triangles.empty()) throw Error(ErrorCode::invalid_parameter, "empty family");
    double cn = 0.0;
    for (const auto& t : family.triangles) cn = std::max(cn, dimple_min_depth(t));
    const double depth = c.value_or(cn);
    if (!(depth >= cn * (1.0 - 1e-12)))
        throw Error(ErrorCode::invalid_parameter, "depth c below the common admissible threshold " + std::to_string(cn));

    MultiPolygon smalls{family.small_triangles(), family.small_union_area};
    MultiPolygon domain{family.trapezoids(), family.trap_area + family.small_union_area};
    for (const auto& s : smalls.parts) domain.parts.push_back(s);

    std::vector<Region> regions;
    regions.reserve(family.triangles.size() + 1);
    regions.push_back({Flat{-depth}, std::move(smalls)});
    for (const auto& t : family.triangles) {
        const double r0 = t.r0();
        regions.push_back({RadialParabola{t.b, r0, r0}, t.trapezoid()});
    }
    return Surface(std::move(domain), std::move(regions), depth,
                   SurfaceInfo{"besicovitch", family.generation, family.base_length, family.trap_height, 0});
}

namespace {

Generator map_generator(const Generator& g, const Similarity& f) {
    const double k = f.scale;
    return std::visit(overloaded{
                          [&](const RadialParabola& r) -> Generator {
                              return RadialParabola{f.apply(r.focus), r.r0 * k, r.focal * k};
                          },
                          [&](const LinearParabola& l) -> Generator {
                              const Vec2 n = f.iso.linear(l.normal);
                              return LinearParabola{n, dot(n, f.iso.translation) + k * l.axis, k * l.offset, k * l.r0,
                                                    k * l.focal};
                          },
                      },
                      g);
}

Formula map_formula(const Formula& fm, const Similarity& f) {
    return std::visit(overloaded{
                          [&](const RadialParabola& r) -> Formula {
                              return std::get<RadialParabola>(map_generator(r, f));
                          },
                          [&](const LinearParabola& l) -> Formula {
                              return std::get<LinearParabola>(map_generator(l, f));
                          },
                          [&](const Flat& fl) -> Formula { return Flat{fl.level * f.scale}; },
                          [&](const Cone& c) -> Formula { return Cone{f.apply(c.apex), c.slope, c.radius * f.scale}; },
                          [&](const MaxOf& m) -> Formula {
                              MaxOf out;
                              for (const auto& g : m.generators) out.generators.push_back(map_generator(g, f));
                              return out;
                          },
                      },
                      fm);
}

Generator shrink_generator(const Generator& g, double lambda) {
    return std::visit(overloaded{
                          [&](RadialParabola r) -> Generator {
                              r.focal /= lambda;
                              return r;
                          },
                          [&](LinearParabola l) -> Generator {
                              l.focal /= lambda;
                              return l;
                          },
                      },
                      g);
}

}  // namespace

Surface scale_copy(const Surface& s, double k, const Isometry& iso) {
    if (!(k > 0.0) || !std::isfinite(k)) throw Error(ErrorCode::invalid_parameter, "scale must be positive");
    const Similarity f{k, iso};
    std::vector<Region> regions;
    regions.reserve(s.regions().size());
    for (const auto& r : s.regions()) {
        Support sup = r.support;
        if (const auto shape = as_shape(r.support)) sup = from_shape(shape_transform(*shape, f));
        regions.push_back({map_formula(r.formula, f), std::move(sup)});
    }
    return Surface(shape_transform(s.domain(), f), std::move(regions), s.depth() * k, s.info());
}

Surface shrink(const Surface& s, double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw Error(ErrorCode::invalid_parameter, "shrink factor must be in (0, 1]");
    std::vector<Region> regions;
    regions.reserve(s.regions().size());
    for (const auto& r : s.regions()) {
        Formula f = std::visit(overloaded{
                                   [&](const RadialParabola& g) -> Formula {
                                       return std::get<RadialParabola>(shrink_generator(g, lambda));
                                   },
                                   [&](const LinearParabola& g) -> Formula {
                                       return std::get<LinearParabola>(shrink_generator(g, lambda));
                                   },
                                   [&](const Flat& fl) -> Formula { return Flat{fl.level * lambda}; },
                                   [&](const Cone& c) -> Formula { return Cone{c.apex, c.slope * lambda, c.radius}; },
                                   [&](const MaxOf& m) -> Formula {
                                       MaxOf out;
                                       for (const auto& g : m.generators) out.generators.push_back(shrink_generator(g, lambda));
                                       return out;
                                   },
                               },
                               r.formula);
        regions.push_back({std::move(f), r.support});
    }
    return Surface(s.domain(), std::move(regions), s.depth() * lambda, s.info());
}

}  // namespace newton_sic

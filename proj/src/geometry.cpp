#include "newton_sic/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "newton_sic/errors.hpp"

namespace newton_sic {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_parameter: return "invalid-parameter";
        case ErrorCode::degenerate_geometry: return "degenerate-geometry";
        case ErrorCode::invalid_geometry: return "invalid-geometry";
        case ErrorCode::resource_limit: return "resource-limit";
        case ErrorCode::out_of_domain: return "out-of-domain";
        case ErrorCode::not_regular: return "not-regular";
        case ErrorCode::parse_error: return "parse-error";
        case ErrorCode::io_error: return "io-error";
    }
    return "unknown";
}

Box Box::merged(const Box& o) const {
    return {std::min(min_x, o.min_x), std::min(min_y, o.min_y),
            std::max(max_x, o.max_x), std::max(max_y, o.max_y)};
}

double signed_area(std::span<const Point2> poly) {
    const std::size_t n = poly.size();
    if (n < 3) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& p = poly[i];
        const Point2& q = poly[(i + 1) % n];
        acc += p.x * q.y - q.x * p.y;
    }
    return 0.5 * acc;
}

double polygon_area(std::span<const Point2> poly) { return std::abs(signed_area(poly)); }

Box bounding_box(std::span<const Point2> pts) {
    Box b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& p : pts) {
        b.min_x = std::min(b.min_x, p.x);
        b.min_y = std::min(b.min_y, p.y);
        b.max_x = std::max(b.max_x, p.x);
        b.max_y = std::max(b.max_y, p.y);
    }
    return b;
}

Polygon ensure_ccw(Polygon poly) {
    if (signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
    return poly;
}

Polygon box_polygon(const Box& b) {
    return {{b.min_x, b.min_y}, {b.max_x, b.min_y}, {b.max_x, b.max_y}, {b.min_x, b.max_y}};
}

bool is_convex(std::span<const Point2> poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    int sign = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double o = orient(poly[i], poly[(i + 1) % n], poly[(i + 2) % n]);
        if (o == 0.0) continue;
        const int s = o > 0.0 ? 1 : -1;
        if (sign == 0) sign = s;
        else if (s != sign) return false;
    }
    return sign != 0;
}

namespace {

bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool segments_touch(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const double o1 = orient(a, b, c);
    const double o2 = orient(a, b, d);
    const double o3 = orient(c, d, a);
    const double o4 = orient(c, d, b);
    if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0)))
        return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

}  // namespace

bool is_simple(std::span<const Point2> poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (const auto& p : poly)
        if (!is_finite(p)) return false;
    if (polygon_area(poly) <= 0.0) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = poly[i];
        const Point2& b = poly[(i + 1) % n];
        if (a == b) return false;
        for (std::size_t j = i + 1; j < n; ++j) {
            const Point2& c = poly[j];
            const Point2& d = poly[(j + 1) % n];
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent) {
                // Adjacent edges share one vertex; they must not fold back onto each other.
                const Point2& shared = (j == i + 1) ? b : a;
                const Point2& other_i = (j == i + 1) ? a : b;
                const Point2& other_j = (j == i + 1) ? d : c;
                if (orient(shared, other_i, other_j) == 0.0 &&
                    dot(other_i - shared, other_j - shared) > 0.0)
                    return false;
                continue;
            }
            if (segments_touch(a, b, c, d)) return false;
        }
    }
    return true;
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
    const Vec2 ab = b - a;
    const double len2 = norm2(ab);
    if (len2 == 0.0) return distance(p, a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + ab * t);
}

bool polygon_contains(std::span<const Point2> poly, const Point2& p, double tol) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = poly[i];
        const Point2& b = poly[j];
        if (tol > 0.0 && point_segment_distance(p, a, b) <= tol) return true;
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xi = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < xi) inside = !inside;
        }
    }
    return inside;
}

double polygon_margin(std::span<const Point2> poly, const Point2& p) {
    double d = std::numeric_limits<double>::infinity();
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) d = std::min(d, point_segment_distance(p, poly[i], poly[(i + 1) % n]));
    return polygon_contains(poly, p) ? d : -d;
}

double convex_distance(std::span<const Point2> poly, const Point2& p) {
    const std::size_t n = poly.size();
    bool inside = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (orient(poly[i], poly[(i + 1) % n], p) < 0.0) {
            inside = false;
            break;
        }
    }
    if (inside) return 0.0;
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) d = std::min(d, point_segment_distance(p, poly[i], poly[(i + 1) % n]));
    return d;
}

Polygon clip_convex(std::span<const Point2> subject, std::span<const Point2> clip) {
    Polygon out(subject.begin(), subject.end());
    const std::size_t m = clip.size();
    Polygon in;
    for (std::size_t e = 0; e < m && !out.empty(); ++e) {
        const Point2& c0 = clip[e];
        const Point2& c1 = clip[(e + 1) % m];
        in.swap(out);
        out.clear();
        const std::size_t k = in.size();
        for (std::size_t i = 0; i < k; ++i) {
            const Point2& p = in[i];
            const Point2& q = in[(i + 1) % k];
            const double sp = orient(c0, c1, p);
            const double sq = orient(c0, c1, q);
            if (sp >= 0.0) out.push_back(p);
            if ((sp >= 0.0) != (sq >= 0.0)) {
                const double t = sp / (sp - sq);
                out.push_back(p + (q - p) * t);
            }
        }
    }
    if (out.size() < 3) out.clear();
    return out;
}

Polygon clip_to_box(std::span<const Point2> subject, const Box& box) {
    const Polygon b = box_polygon(box);
    return clip_convex(subject, b);
}

double convex_overlap_area(std::span<const Point2> a, std::span<const Point2> b) {
    if (signed_area(b) < 0.0) {
        Polygon bc(b.begin(), b.end());
        std::reverse(bc.begin(), bc.end());
        return polygon_area(clip_convex(a, bc));
    }
    return polygon_area(clip_convex(a, b));
}

namespace {

bool separated_on_axes(std::span<const Point2> a, std::span<const Point2> b,
                       std::span<const Point2> axes_from, double tol) {
    const std::size_t n = axes_from.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 e = axes_from[(i + 1) % n] - axes_from[i];
        const double len = norm(e);
        if (len == 0.0) continue;
        const Vec2 axis{-e.y / len, e.x / len};
        double amin = std::numeric_limits<double>::infinity(), amax = -amin;
        double bmin = amin, bmax = -amin;
        for (const auto& p : a) {
            const double s = dot(p, axis);
            amin = std::min(amin, s);
            amax = std::max(amax, s);
        }
        for (const auto& p : b) {
            const double s = dot(p, axis);
            bmin = std::min(bmin, s);
            bmax = std::max(bmax, s);
        }
        if (std::min(amax, bmax) - std::max(amin, bmin) <= tol) return true;
    }
    return false;
}

}  // namespace

bool convex_polygons_overlap(std::span<const Point2> a, std::span<const Point2> b, double tol) {
    if (separated_on_axes(a, b, a, tol)) return false;
    if (separated_on_axes(a, b, b, tol)) return false;
    return true;
}

bool convex_overlaps_box(std::span<const Point2> poly, const Box& box) {
    const Box pb = bounding_box(poly);
    if (!pb.overlaps(box)) return false;
    const Polygon bp = box_polygon(box);
    return !separated_on_axes(poly, bp, poly, 0.0);
}

std::optional<Point2> line_intersection(const Point2& p1, const Point2& p2,
                                        const Point2& q1, const Point2& q2, double parallel_tol) {
    const Vec2 d1 = p2 - p1;
    const Vec2 d2 = q2 - q1;
    const double den = cross(d1, d2);
    if (std::abs(den) <= parallel_tol * norm(d1) * norm(d2)) return std::nullopt;
    const double t = cross(q1 - p1, d2) / den;
    return p1 + d1 * t;
}

std::optional<double> ray_segment_hit(const Point2& origin, const Vec2& dir,
                                      const Point2& a, const Point2& b) {
    const Vec2 e = b - a;
    const double den = cross(dir, e);
    if (den == 0.0) return std::nullopt;
    const Vec2 w = a - origin;
    const double t = cross(w, e) / den;
    const double s = cross(w, dir) / den;
    if (t < 0.0 || s < 0.0 || s > 1.0) return std::nullopt;
    return t;
}

std::vector<Polygon> triangulate(std::span<const Point2> poly_in) {
    Polygon poly = ensure_ccw(Polygon(poly_in.begin(), poly_in.end()));
    std::vector<Polygon> tris;
    std::vector<std::size_t> idx(poly.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto is_ear = [&](std::size_t k) {
        const std::size_t m = idx.size();
        const Point2& a = poly[idx[(k + m - 1) % m]];
        const Point2& b = poly[idx[k]];
        const Point2& c = poly[idx[(k + 1) % m]];
        if (orient(a, b, c) <= 0.0) return false;
        for (std::size_t j = 0; j < m; ++j) {
            if (j == k || j == (k + 1) % m || j == (k + m - 1) % m) continue;
            const Point2& p = poly[idx[j]];
            if (orient(a, b, p) >= 0.0 && orient(b, c, p) >= 0.0 && orient(c, a, p) >= 0.0) return false;
        }
        return true;
    };
    while (idx.size() > 3) {
        bool clipped = false;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (!is_ear(k)) continue;
            const std::size_t m = idx.size();
            tris.push_back({poly[idx[(k + m - 1) % m]], poly[idx[k]], poly[idx[(k + 1) % m]]});
            idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(k));
            clipped = true;
            break;
        }
        if (!clipped) throw Error(ErrorCode::invalid_geometry, "polygon could not be triangulated");
    }
    if (idx.size() == 3) tris.push_back({poly[idx[0]], poly[idx[1]], poly[idx[2]]});
    return tris;
}

std::vector<Polygon> convex_pieces(std::span<const Point2> poly) {
    if (is_convex(poly)) return {ensure_ccw(Polygon(poly.begin(), poly.end()))};
    return triangulate(poly);
}

// ---- union area ----------------------------------------------------------------------------

namespace {

std::vector<Polygon> prepare_pieces(std::span<const Polygon> polys) {
    std::vector<Polygon> pieces;
    pieces.reserve(polys.size());
    for (const auto& p : polys) {
        if (!is_simple(p)) throw Error(ErrorCode::invalid_geometry, "union input polygon is not simple");
        for (auto& piece : convex_pieces(p))
            if (polygon_area(piece) > 0.0) pieces.push_back(std::move(piece));
    }
    return pieces;
}

// Monotone chain of a convex polygon: vertices with strictly increasing y.
struct Chain {
    std::vector<Point2> pts;
};

void build_chains(const Polygon& ccw, Chain& left, Chain& right) {
    const std::size_t n = ccw.size();
    std::size_t b = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (ccw[i].y < ccw[b].y || (ccw[i].y == ccw[b].y && ccw[i].x < ccw[b].x)) b = i;
    auto next = [n](std::size_t i) { return (i + 1) % n; };
    auto prev = [n](std::size_t i) { return (i + n - 1) % n; };

    std::size_t i = b;
    std::size_t guard = 0;
    while (ccw[next(i)].y == ccw[i].y && guard++ < n) i = next(i);
    right.pts.assign(1, ccw[i]);
    guard = 0;
    while (ccw[next(i)].y > ccw[i].y && guard++ < n) {
        i = next(i);
        right.pts.push_back(ccw[i]);
    }

    i = b;
    left.pts.assign(1, ccw[i]);
    guard = 0;
    while (ccw[prev(i)].y > ccw[i].y && guard++ < n) {
        i = prev(i);
        left.pts.push_back(ccw[i]);
    }
}

// Kinetic sweep in y: cross-sections of convex pieces are intervals whose endpoints move
// linearly between events, so the union length is linear between consecutive events.
class UnionSweep {
public:
    explicit UnionSweep(const std::vector<Polygon>& pieces) {
        chains_.resize(2 * pieces.size());
        for (std::size_t p = 0; p < pieces.size(); ++p) build_chains(pieces[p], chains_[2 * p], chains_[2 * p + 1]);
        const std::size_t m = chains_.size();
        ep_.resize(m);
        pos_.assign(m, -1);
        for (std::size_t p = 0; p < pieces.size(); ++p) {
            const double y0 = chains_[2 * p].pts.front().y;
            if (chains_[2 * p].pts.size() < 2 || chains_[2 * p + 1].pts.size() < 2) continue;
            push({y0, Kind::start, static_cast<int>(p), -1, 0, 0});
        }
    }

    double run(std::size_t& events) {
        while (!heap_.empty()) {
            std::pop_heap(heap_.begin(), heap_.end(), later);
            const Event ev = heap_.back();
            heap_.pop_back();
            if (!valid(ev)) continue;
            advance(ev.y);
            ++events;
            switch (ev.kind) {
                case Kind::start: start_piece(ev.a); break;
                case Kind::segment_end: next_segment(ev.a); break;
                case Kind::swap: swap_adjacent(pos_[ev.a]); break;
            }
        }
        return area_;
    }

private:
    enum class Kind { start, segment_end, swap };
    struct Event {
        double y;
        Kind kind;
        int a;
        int b;
        unsigned ver_a;
        unsigned ver_b;
    };
    struct Endpoint {
        int seg = 0;
        double x0 = 0, y0 = 0, v = 0, y_end = 0;
        int delta = 0;  // +1 entering (left chain), -1 leaving (right chain)
        unsigned ver = 0;
        double x(double y) const { return x0 + v * (y - y0); }
    };

    static bool later(const Event& l, const Event& r) { return l.y > r.y; }

    void push(const Event& e) {
        heap_.push_back(e);
        std::push_heap(heap_.begin(), heap_.end(), later);
    }

    bool valid(const Event& e) const {
        switch (e.kind) {
            case Kind::start: return true;
            case Kind::segment_end: return pos_[e.a] >= 0 && ep_[e.a].ver == e.ver_a;
            case Kind::swap:
                return pos_[e.a] >= 0 && pos_[e.b] == pos_[e.a] + 1 &&
                       ep_[e.a].ver == e.ver_a && ep_[e.b].ver == e.ver_b;
        }
        return false;
    }

    void advance(double y) {
        if (!std::isfinite(y_)) {
            y_ = y;
            return;
        }
        const double dy = y - y_;
        if (dy > 0.0) {
            area_ += length_ * dy + 0.5 * slope_ * dy * dy;
            length_ += slope_ * dy;
            y_ = y;
        }
    }

    void set_segment(int id) {
        Endpoint& e = ep_[id];
        const auto& pts = chains_[id].pts;
        const Point2& a = pts[e.seg];
        const Point2& b = pts[e.seg + 1];
        e.x0 = a.x;
        e.y0 = a.y;
        e.v = (b.x - a.x) / (b.y - a.y);
        e.y_end = b.y;
        ++e.ver;
    }

    static int covered(int count) { return count > 0 ? 1 : 0; }

    int count_before(int i) const { return i > 0 ? cnt_[i - 1] : 0; }

    int weight(int i) const { return covered(count_before(i)) - covered(cnt_[i]); }

    void rebuild() {
        cnt_.resize(order_.size());
        int c = 0;
        length_ = 0.0;
        slope_ = 0.0;
        for (std::size_t i = 0; i < order_.size(); ++i) {
            const Endpoint& e = ep_[order_[i]];
            pos_[order_[i]] = static_cast<int>(i);
            c += e.delta;
            cnt_[i] = c;
        }
        for (std::size_t i = 0; i < order_.size(); ++i) {
            const Endpoint& e = ep_[order_[i]];
            const int w = weight(static_cast<int>(i));
            length_ += w * e.x(y_);
            slope_ += w * e.v;
        }
    }

    void schedule_pair(int i) {
        if (i < 0 || i + 1 >= static_cast<int>(order_.size())) return;
        const int a = order_[i];
        const int b = order_[i + 1];
        const Endpoint& ea = ep_[a];
        const Endpoint& eb = ep_[b];
        if (ea.v <= eb.v) return;
        const double gap = std::max(0.0, eb.x(y_) - ea.x(y_));
        const double y = y_ + gap / (ea.v - eb.v);
        if (y > std::min(ea.y_end, eb.y_end)) return;
        push({y, Kind::swap, a, b, ea.ver, eb.ver});
    }

    void schedule_segment_end(int id) {
        push({ep_[id].y_end, Kind::segment_end, id, -1, ep_[id].ver, 0});
    }

    bool before(int a, int b) const {
        const double xa = ep_[a].x(y_), xb = ep_[b].x(y_);
        if (xa != xb) return xa < xb;
        return ep_[a].v < ep_[b].v;
    }

    void insert(int id) {
        auto it = std::lower_bound(order_.begin(), order_.end(), id,
                                   [this](int lhs, int rhs) { return before(lhs, rhs); });
        order_.insert(it, id);
    }

    void start_piece(int p) {
        const int l = 2 * p, r = 2 * p + 1;
        ep_[l].seg = 0;
        ep_[l].delta = +1;
        set_segment(l);
        ep_[r].seg = 0;
        ep_[r].delta = -1;
        set_segment(r);
        insert(l);
        insert(r);
        rebuild();
        for (int id : {l, r}) {
            schedule_segment_end(id);
            schedule_pair(pos_[id] - 1);
            schedule_pair(pos_[id]);
        }
    }

    void next_segment(int id) {
        Endpoint& e = ep_[id];
        if (e.seg + 2 < static_cast<int>(chains_[id].pts.size())) {
            const int i = pos_[id];
            const double v_old = e.v;
            ++e.seg;
            set_segment(id);
            slope_ += weight(i) * (e.v - v_old);
            schedule_segment_end(id);
            schedule_pair(i - 1);
            schedule_pair(i);
            return;
        }
        const int i = pos_[id];
        order_.erase(order_.begin() + i);
        pos_[id] = -1;
        ++e.ver;
        rebuild();
        schedule_pair(i - 1);
    }

    void swap_adjacent(int i) {
        const int a = order_[i];
        const int b = order_[i + 1];
        const int wa_old = weight(i);
        const int wb_old = weight(i + 1);
        std::swap(order_[i], order_[i + 1]);
        pos_[a] = i + 1;
        pos_[b] = i;
        cnt_[i] = count_before(i) + ep_[b].delta;
        const int wb_new = weight(i);
        const int wa_new = weight(i + 1);
        length_ += (wa_new - wa_old) * ep_[a].x(y_) + (wb_new - wb_old) * ep_[b].x(y_);
        slope_ += (wa_new - wa_old) * ep_[a].v + (wb_new - wb_old) * ep_[b].v;
        schedule_pair(i - 1);
        schedule_pair(i + 1);
    }

    std::vector<Chain> chains_;
    std::vector<Endpoint> ep_;
    std::vector<int> pos_;
    std::vector<int> order_;
    std::vector<int> cnt_;
    std::vector<Event> heap_;
    double y_ = -std::numeric_limits<double>::infinity();
    double length_ = 0.0;
    double slope_ = 0.0;
    double area_ = 0.0;
};

std::optional<std::pair<double, double>> cross_section(const Polygon& ccw, double y) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    const std::size_t n = ccw.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = ccw[i];
        const Point2& b = ccw[(i + 1) % n];
        if ((a.y <= y && y <= b.y) || (b.y <= y && y <= a.y)) {
            if (a.y == b.y) {
                lo = std::min({lo, a.x, b.x});
                hi = std::max({hi, a.x, b.x});
            } else {
                const double x = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
        }
    }
    if (lo > hi) return std::nullopt;
    return std::make_pair(lo, hi);
}

using Interval = std::pair<double, double>;

std::vector<Interval> merge_intervals(std::vector<Interval> iv) {
    std::sort(iv.begin(), iv.end());
    std::vector<Interval> out;
    for (const auto& i : iv) {
        if (!out.empty() && i.first <= out.back().second) out.back().second = std::max(out.back().second, i.second);
        else out.push_back(i);
    }
    return out;
}

double merged_length(std::vector<Interval>& iv) {
    double total = 0.0;
    for (const auto& i : merge_intervals(std::move(iv))) total += i.second - i.first;
    iv.clear();
    return total;
}

// Horizontal strips of height h. Each strip contributes h times the exact union length at its
// midline; the error is h times the width that is not certainly covered (or uncovered) over the
// whole strip. A convex cross-section between two heights contains the overlap of the end sections.
AreaEstimate raster_union(const std::vector<Polygon>& pieces, double h) {
    AreaEstimate est{0.0, 0.0, UnionMethod::rasterization, 0};
    if (pieces.empty()) return est;
    if (!(h > 0.0)) throw Error(ErrorCode::invalid_parameter, "rasterization needs a positive resolution");
    Box box = bounding_box(pieces.front());
    std::vector<Box> boxes;
    boxes.reserve(pieces.size());
    for (const auto& p : pieces) {
        boxes.push_back(bounding_box(p));
        box = box.merged(boxes.back());
    }
    const double rows_d = std::ceil(box.height() / h);
    if (rows_d * static_cast<double>(pieces.size()) > 1e11)
        throw Error(ErrorCode::resource_limit, "rasterization grid too large");
    const auto rows = static_cast<std::size_t>(rows_d);

    std::vector<std::size_t> by_ymin(pieces.size());
    std::iota(by_ymin.begin(), by_ymin.end(), 0);
    std::sort(by_ymin.begin(), by_ymin.end(), [&](auto a, auto b) { return boxes[a].min_y < boxes[b].min_y; });

    std::vector<std::size_t> active;
    std::vector<Interval> mid, inner, outer;
    std::size_t next = 0;
    double value = 0.0, uncertain = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double ya = box.min_y + static_cast<double>(r) * h;
        const double yb = ya + h;
        const double ym = ya + 0.5 * h;
        while (next < by_ymin.size() && boxes[by_ymin[next]].min_y < yb) active.push_back(by_ymin[next++]);
        std::erase_if(active, [&](std::size_t i) { return boxes[i].max_y <= ya; });

        for (std::size_t i : active) {
            const Polygon& poly = pieces[i];
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            const auto s0 = cross_section(poly, std::max(ya, boxes[i].min_y));
            const auto s1 = cross_section(poly, std::min(yb, boxes[i].max_y));
            for (const auto& s : {s0, s1})
                if (s) {
                    lo = std::min(lo, s->first);
                    hi = std::max(hi, s->second);
                }
            for (const auto& v : poly)
                if (v.y > ya && v.y < yb) {
                    lo = std::min(lo, v.x);
                    hi = std::max(hi, v.x);
                }
            if (!(hi > lo)) continue;
            outer.emplace_back(lo, hi);
            if (const auto sm = cross_section(poly, ym); sm && sm->second > sm->first) mid.push_back(*sm);
            if (boxes[i].min_y <= ya && boxes[i].max_y >= yb && s0 && s1) {
                const double in_lo = std::max(s0->first, s1->first);
                const double in_hi = std::min(s0->second, s1->second);
                if (in_hi > in_lo) inner.emplace_back(in_lo, in_hi);
            }
        }
        est.work += outer.size();
        value += merged_length(mid);
        uncertain += merged_length(outer) - merged_length(inner);
    }
    est.value = value * h;
    est.error = uncertain * h;
    return est;
}

// Area of the union boundary: each edge keeps the parts not covered by other pieces, and the
// kept parts are integrated with the shoelace formula. Collinear edges with the same direction
// are kept once (lowest index); opposite directions cancel.
// Calls keep(p, q, t0, t1) for every part of a piece edge p->q not covered by another piece.
// Collinear overlapping edges with the same direction are kept once, by the lowest index.
template <class Keep>
std::size_t visit_union_boundary(const std::vector<Polygon>& pieces, Keep&& keep) {
    std::vector<Box> boxes;
    boxes.reserve(pieces.size());
    for (const auto& p : pieces) boxes.push_back(bounding_box(p));
    std::vector<Interval> covered;
    std::size_t work = 0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const Polygon& poly = pieces[i];
        for (std::size_t e = 0; e < poly.size(); ++e) {
            const Point2 p = poly[e];
            const Point2 q = poly[(e + 1) % poly.size()];
            const Box edge_box{std::min(p.x, q.x), std::min(p.y, q.y), std::max(p.x, q.x), std::max(p.y, q.y)};
            covered.clear();
            for (std::size_t j = 0; j < pieces.size(); ++j) {
                if (j == i || !boxes[j].overlaps(edge_box)) continue;
                const Polygon& other = pieces[j];
                double lo = 0.0, hi = 1.0;
                bool inside = true;
                for (std::size_t k = 0; k < other.size() && inside; ++k) {
                    const Point2& a = other[k];
                    const Point2& b = other[(k + 1) % other.size()];
                    const double f0 = orient(a, b, p), f1 = orient(a, b, q);
                    if (f0 == 0.0 && f1 == 0.0) {
                        if (dot(b - a, q - p) > 0.0 && j > i) inside = false;
                        continue;
                    }
                    if (f0 < 0.0 && f1 < 0.0) inside = false;
                    else if (f0 < 0.0) lo = std::max(lo, f0 / (f0 - f1));
                    else if (f1 < 0.0) hi = std::min(hi, f0 / (f0 - f1));
                    if (lo >= hi) inside = false;
                }
                if (inside) covered.emplace_back(lo, hi);
            }
            work += covered.size() + 1;
            std::sort(covered.begin(), covered.end());
            double reach = 0.0;
            for (const auto& [t0, t1] : covered) {
                if (t0 > reach) keep(p, q, reach, t0);
                reach = std::max(reach, t1);
            }
            if (reach < 1.0) keep(p, q, reach, 1.0);
        }
    }
    return work;
}

AreaEstimate boundary_union(const std::vector<Polygon>& pieces) {
    AreaEstimate est{0.0, 0.0, UnionMethod::exact_boundary, 0};
    double area = 0.0, magnitude = 0.0;
    est.work = visit_union_boundary(pieces, [&](const Point2& p, const Point2& q, double t0, double t1) {
        const double c = cross(p + (q - p) * t0, p + (q - p) * t1);
        area += c;
        magnitude += std::abs(c);
    });
    est.value = 0.5 * area;
    est.error = 64.0 * std::numeric_limits<double>::epsilon() * 0.5 * magnitude *
                std::max(1.0, std::log2(static_cast<double>(est.work) + 1.0));
    return est;
}

}  // namespace

std::vector<Segment> union_boundary(std::span<const Polygon> polys) {
    std::vector<Segment> out;
    visit_union_boundary(prepare_pieces(polys), [&](const Point2& p, const Point2& q, double t0, double t1) {
        out.push_back({t0 == 0.0 ? p : p + (q - p) * t0, t1 == 1.0 ? q : p + (q - p) * t1});
    });
    return out;
}

AreaEstimate union_area(std::span<const Polygon> polys, UnionMethod method, double resolution) {
    const std::vector<Polygon> pieces = prepare_pieces(polys);
    if (method == UnionMethod::rasterization) return raster_union(pieces, resolution);
    if (method == UnionMethod::exact_boundary) return boundary_union(pieces);
    AreaEstimate est{0.0, 0.0, UnionMethod::exact_sweep, 0};
    if (pieces.empty()) return est;
    UnionSweep sweep(pieces);
    est.value = sweep.run(est.work);
    double scale = 0.0;
    for (const auto& p : pieces) scale += polygon_area(p);
    // Accumulated rounding of the piecewise-linear integration.
    est.error = 64.0 * std::numeric_limits<double>::epsilon() * scale *
                std::max(1.0, std::log2(static_cast<double>(est.work) + 1.0));
    return est;
}

// ---- disjointness ----------------------------------------------------------------------------

namespace {

struct PieceSet {
    std::vector<std::vector<Polygon>> pieces;
    std::vector<Box> boxes;
};

PieceSet make_piece_set(std::span<const Polygon> polys) {
    PieceSet s;
    s.pieces.reserve(polys.size());
    for (const auto& p : polys) {
        if (!is_simple(p)) throw Error(ErrorCode::invalid_geometry, "disjointness input polygon is not simple");
        s.pieces.push_back(convex_pieces(p));
        s.boxes.push_back(bounding_box(p));
    }
    return s;
}

double pair_overlap(const PieceSet& s, std::size_t i, std::size_t j) {
    if (!s.boxes[i].overlaps(s.boxes[j])) return 0.0;
    double a = 0.0;
    for (const auto& pi : s.pieces[i])
        for (const auto& pj : s.pieces[j]) a += convex_overlap_area(pi, pj);
    return a;
}

void record(DisjointReport& rep, double overlap, std::size_t i, std::size_t j, double tol) {
    ++rep.pairs_checked;
    if (overlap > rep.worst_overlap) {
        rep.worst_overlap = overlap;
        if (overlap > tol) {
            rep.first = i;
            rep.second = j;
        }
    }
    if (overlap > tol) rep.disjoint = false;
}

}  // namespace

DisjointReport verify_disjoint(std::span<const Polygon> polys, double tol) {
    const PieceSet s = make_piece_set(polys);
    DisjointReport rep;
    std::vector<std::size_t> order(polys.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s.boxes[a].min_x < s.boxes[b].min_x; });
    for (std::size_t u = 0; u < order.size(); ++u) {
        for (std::size_t v = u + 1; v < order.size(); ++v) {
            const std::size_t i = order[u], j = order[v];
            if (s.boxes[j].min_x > s.boxes[i].max_x) break;
            record(rep, pair_overlap(s, i, j), std::min(i, j), std::max(i, j), tol);
        }
    }
    return rep;
}

DisjointReport verify_disjoint_pairs(std::span<const Polygon> polys,
                                     std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                     double tol) {
    const PieceSet s = make_piece_set(polys);
    DisjointReport rep;
    for (const auto& [i, j] : pairs) {
        if (i >= polys.size() || j >= polys.size() || i == j)
            throw Error(ErrorCode::invalid_parameter, "pair index out of range");
        record(rep, pair_overlap(s, i, j), i, j, tol);
    }
    return rep;
}

}  // namespace newton_sic

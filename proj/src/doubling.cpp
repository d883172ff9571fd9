#include "newton_sic/doubling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "newton_sic/errors.hpp"

namespace newton_sic {

double BigTriangle::r0() const { return std::max(distance(a, b), distance(b, c)); }

double BigTriangle::kappa() const { return point_segment_distance(b, m, n) / r0(); }

double BigTriangle::small_height() const {
    const double len = distance(m, n);
    return std::abs(cross(n - m, b - m)) / len;
}

double BigTriangle::trap_height() const {
    const double len = distance(m, n);
    return std::abs(cross(n - m, a - m)) / len;
}

void BigTriangle::validate() const {
    for (const auto& p : {a, b, c, m, n})
        if (!is_finite(p)) throw Error(ErrorCode::degenerate_geometry, "non-finite triangle vertex");
    const double scale = std::max({distance(a, b), distance(b, c), distance(a, c)});
    if (!(scale > 0.0) || std::abs(orient(a, b, c)) <= tol::incidence * scale * scale)
        throw Error(ErrorCode::degenerate_geometry, "big triangle has no area");
    const Vec2 mn = n - m;
    const Vec2 ac = c - a;
    if (std::abs(cross(mn, ac)) > tol::length_rel * norm(mn) * norm(ac))
        throw Error(ErrorCode::degenerate_geometry, "separating segment is not parallel to the base");
    auto param_on = [&](const Point2& from, const Point2& to, const Point2& p, const char* what) {
        const Vec2 d = to - from;
        if (std::abs(cross(d, p - from)) > tol::length_rel * norm2(d))
            throw Error(ErrorCode::degenerate_geometry, std::string(what) + " is off its lateral side");
        const double s = dot(p - from, d) / norm2(d);
        if (!(s > 0.0 && s < 1.0))
            throw Error(ErrorCode::degenerate_geometry, std::string(what) + " is not strictly inside its side");
    };
    param_on(a, b, m, "M");
    param_on(c, b, n, "N");
}

BigTriangle make_initial_triangle(double base_length, double trap_height, double small_height) {
    const double a = base_length, d = trap_height, h = small_height;
    if (!(a > 0.0) || !(d > 0.0) || !(h > 0.0) || !std::isfinite(a) || !std::isfinite(d) || !std::isfinite(h))
        throw Error(ErrorCode::invalid_parameter, "initial triangle needs positive finite a, d, h");
    const double half_base = a * (h + d) / (2.0 * h);
    BigTriangle t{{-half_base, -d}, {0.0, h}, {half_base, -d}, {-0.5 * a, 0.0}, {0.5 * a, 0.0}};
    t.validate();
    return t;
}

DoublingResult delta_double(const BigTriangle& tri, double delta) {
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw Error(ErrorCode::invalid_parameter, "doubling needs delta > 0");
    DoublingTrace tr;
    tr.mid = midpoint(tri.m, tri.n);
    tr.m_ext = tri.b + (tri.b - tri.m) * delta;
    tr.n_ext = tri.b + (tri.b - tri.n) * delta;

    auto meet = [](const Point2& p1, const Point2& p2, const Point2& q1, const Point2& q2, const char* what) {
        auto x = line_intersection(p1, p2, q1, q2, 1e-12);
        if (!x || !is_finite(*x)) throw Error(ErrorCode::degenerate_geometry, std::string("parallel lines at ") + what);
        return *x;
    };
    tr.c_new = meet(tr.m_ext, tr.mid, tri.a, tri.c, "C'");
    tr.a_new = meet(tr.n_ext, tr.mid, tri.a, tri.c, "A'");
    tr.r = meet(tr.n_ext, tr.mid, tri.m, tri.b, "R");
    tr.s = meet(tr.m_ext, tr.mid, tri.n, tri.b, "S");
    const Point2 along = tri.b + (tri.n - tri.m);
    tr.p = meet(tr.n_ext, tr.mid, tri.b, along, "P");
    tr.q = meet(tr.m_ext, tr.mid, tri.b, along, "Q");

    DoublingResult out{BigTriangle{tri.a, tr.m_ext, tr.c_new, tri.m, tr.mid},
                       BigTriangle{tr.a_new, tr.n_ext, tri.c, tr.mid, tri.n}, tr};
    out.left.validate();
    out.right.validate();
    return out;
}

DeltaRule harmonic_delta_rule() {
    return [](int m) { return 1.0 / static_cast<double>(m); };
}

std::vector<Polygon> DoublingFamily::small_triangles() const {
    std::vector<Polygon> out;
    out.reserve(triangles.size());
    for (const auto& t : triangles) out.push_back(t.small_triangle());
    return out;
}

std::vector<Polygon> DoublingFamily::trapezoids() const {
    std::vector<Polygon> out;
    out.reserve(triangles.size());
    for (const auto& t : triangles) out.push_back(t.trapezoid());
    return out;
}

AreaEstimate measure_small_union(const std::vector<BigTriangle>& tris, const FamilyOptions& options) {
    std::vector<Polygon> polys;
    polys.reserve(tris.size());
    for (const auto& t : tris) polys.push_back(t.small_triangle());
    const int gen = static_cast<int>(std::lround(std::log2(static_cast<double>(tris.size()))));
    if (gen <= options.exact_union_max_generation) return union_area(polys, UnionMethod::exact_boundary);
    double h = options.raster_resolution;
    if (!(h > 0.0)) {
        double lo = polys.front().front().y, hi = lo;
        for (const auto& p : polys)
            for (const auto& v : p) {
                lo = std::min(lo, v.y);
                hi = std::max(hi, v.y);
            }
        h = (hi - lo) / 16384.0;
    }
    return union_area(polys, UnionMethod::rasterization, h);
}

DoublingFamily build_family(const FamilyOptions& opt) {
    const int n = opt.generation;
    if (n < 0) throw Error(ErrorCode::invalid_parameter, "generation must be >= 0");
    if (n > opt.max_generation)
        throw Error(ErrorCode::resource_limit, "generation " + std::to_string(n) + " exceeds the budget of " +
                                                   std::to_string(opt.max_generation));
    if (!(opt.base_length > 0.0)) throw Error(ErrorCode::invalid_parameter, "base length must be positive");
    double d = 0.0;
    if (opt.trap_height) {
        d = *opt.trap_height;
        if (!(d > 0.0)) throw Error(ErrorCode::invalid_parameter, "trapezoid height must be positive");
    } else {
        if (n < 1) throw Error(ErrorCode::invalid_parameter, "automatic trapezoid height sqrt(n) needs n >= 1");
        d = std::sqrt(static_cast<double>(n));
    }
    const DeltaRule rule = opt.delta_rule ? opt.delta_rule : harmonic_delta_rule();

    DoublingFamily fam;
    fam.generation = n;
    fam.base_length = opt.base_length;
    fam.trap_height = d;
    fam.triangles = {make_initial_triangle(opt.base_length, d, opt.initial_small_height)};
    fam.small_heights = {opt.initial_small_height};
    if (opt.measure_each_step) fam.step_union_areas.push_back(measure_small_union(fam.triangles, opt).value);

    for (int m = 1; m <= n; ++m) {
        const double delta = rule(m);
        if (!(delta > 0.0) || !std::isfinite(delta))
            throw Error(ErrorCode::invalid_parameter, "delta rule produced a non-positive value");
        fam.deltas.push_back(delta);
        std::vector<BigTriangle> next;
        next.reserve(2 * fam.triangles.size());
        const double ratio = delta / (1.0 + 2.0 * delta);
        for (const auto& t : fam.triangles) {
            DoublingResult r = delta_double(t, delta);
            const double mb = distance(t.m, t.b);
            const double rb = distance(r.trace.r, t.b);
            fam.max_rb_ratio_error = std::max(fam.max_rb_ratio_error, std::abs(rb / mb - ratio) / ratio);
            fam.max_partition_error = std::max({fam.max_partition_error, distance(r.left.m, t.m),
                                                distance(r.left.n, r.right.m), distance(r.right.n, t.n)});
            next.push_back(r.left);
            next.push_back(r.right);
        }
        fam.triangles = std::move(next);
        fam.small_heights.push_back(fam.small_heights.back() * (1.0 + delta));
        if (opt.measure_each_step) fam.step_union_areas.push_back(measure_small_union(fam.triangles, opt).value);
    }

    const AreaEstimate su = measure_small_union(fam.triangles, opt);
    fam.small_union_area = su.value;
    fam.small_union_error = su.error;
    fam.small_union_method = su.method;
    if (!opt.measure_each_step) fam.step_union_areas = {su.value};
    fam.kappa_min = 1.0;
    for (const auto& t : fam.triangles) {
        fam.trap_area += polygon_area(t.trapezoid());
        fam.kappa_min = std::min(fam.kappa_min, t.kappa());
    }
    return fam;
}

FamilyCheck check_family(const DoublingFamily& family, double overlap_tol, int full_pairwise_max_generation,
                         std::size_t random_pairs, std::uint64_t seed) {
    FamilyCheck out;
    const auto traps = family.trapezoids();
    const std::size_t k = traps.size();
    if (family.generation <= full_pairwise_max_generation) {
        out.trapezoids = verify_disjoint(traps, overlap_tol);
        out.full_pairwise = true;
    } else {
        std::set<std::pair<std::size_t, std::size_t>> chosen;
        for (std::size_t i = 0; i + 1 < k; ++i) chosen.emplace(i, i + 1);
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> pick(0, k - 1);
        std::size_t tries = 0;
        while (k > 2 && chosen.size() < (k - 1) + random_pairs && tries++ < 20 * random_pairs) {
            std::size_t i = pick(rng), j = pick(rng);
            if (i > j) std::swap(i, j);
            if (j <= i + 1) continue;
            chosen.emplace(i, j);
        }
        const std::vector<std::pair<std::size_t, std::size_t>> pairs(chosen.begin(), chosen.end());
        out.trapezoids = verify_disjoint_pairs(traps, pairs, overlap_tol);
    }

    const Point2 m0 = family.triangles.front().m;
    const Point2 n_last = family.triangles.back().n;
    const Vec2 axis = (n_last - m0) / distance(n_last, m0);
    auto side = [&](const Point2& p) { return cross(axis, p - m0); };
    bool separated = true;
    double partition = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const BigTriangle& t = family.triangles[i];
        for (const auto& p : {t.a, t.c}) separated = separated && side(p) <= tol::incidence;
        separated = separated && side(t.b) >= -tol::incidence;
        partition = std::max({partition, std::abs(side(t.m)), std::abs(side(t.n))});
        if (i + 1 < k) partition = std::max(partition, distance(t.n, family.triangles[i + 1].m));
    }
    out.trapezoids_below_small_triangles = separated;
    out.partition_error = partition;
    return out;
}

}  // namespace newton_sic

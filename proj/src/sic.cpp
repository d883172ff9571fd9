#include "newton_sic/sic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "newton_sic/errors.hpp"
#include "newton_sic/resistance.hpp"
#include "parallel.hpp"

namespace newton_sic {

const char* to_string(SicMode m) {
    switch (m) {
        case SicMode::analytic: return "analytic";
        case SicMode::raytrace: return "raytrace";
        case SicMode::both: return "both";
    }
    return "unknown";
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::tangent: return "tangent";
        case Verdict::violation: return "violation";
    }
    return "unknown";
}

const char* to_string(Sampler s) {
    switch (s) {
        case Sampler::grid: return "grid";
        case Sampler::halton: return "halton";
        case Sampler::random: return "random";
    }
    return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Boundary band for trace points at the rounding scale of the coordinates. The dimple jumps from
// -c to 0 on its sides, so the wider incidence band would move apex contacts along the trace.
double trace_band(const Surface& s) {
    const Box b = s.bbox();
    const double scale = std::max({std::abs(b.min_x), std::abs(b.max_x), std::abs(b.min_y), std::abs(b.max_y),
                                   b.width(), b.height()});
    return 64.0 * std::numeric_limits<double>::epsilon() * scale;
}

std::optional<double> trace_value(const Surface& s, const Point2& y, double band) {
    if (!s.contains(y, tol::incidence)) return std::nullopt;
    if (s.domain_margin(y) <= band) return 0.0;
    return s.formula_value(y);
}

Vec2 regular_gradient(const Surface& s, const Point2& x) {
    const SurfaceSample e = s.eval(x);
    if (!e.regular || !e.gradient) throw Error(ErrorCode::not_regular, "gradient undefined at the sample point");
    return *e.gradient;
}

/// Horizontal distances ell along `dir` (unit) at which the trajectory is probed.
std::vector<double> trace_grid(const Surface& s, const Point2& x, const Vec2& dir, int t_points) {
    const Box b = s.bbox();
    const double diam = std::hypot(b.width(), b.height());
    const auto exits = s.domain_crossings(x, dir);
    double far = 0.0;
    for (double t : exits) far = std::max(far, t);
    std::vector<double> out;
    const double lo = min_trace_fraction * diam;
    if (far > lo) {
        const int m = std::max(2, t_points);
        const double ratio = std::pow(far / lo, 1.0 / (m - 1));
        double ell = lo;
        for (int i = 0; i < m; ++i, ell *= ratio) out.push_back(std::min(ell, far));
    }
    out.push_back(std::max(far, lo));
    for (double t : s.ray_crossings(x, dir))
        if (t > lo && t <= far) out.push_back(t);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct Trace {
    double value = kInf;
    double at = 0.0;
};

Trace analytic_trace(const Surface& s, const Point2& x, const Vec2& g, int t_points) {
    const double gn = norm(g);
    const double rhs = 0.5 * (1.0 - gn * gn);
    if (gn == 0.0) return {rhs, 0.0};
    const double ux = *s.value_at(x);
    const double band = trace_band(s);
    const Vec2 dir = g * (-1.0 / gn);
    Trace best;
    for (double ell : trace_grid(s, x, dir, t_points)) {
        const auto uy = trace_value(s, x + dir * ell, band);
        if (!uy) continue;
        const double t = ell / gn;
        const double slack = rhs - (*uy - ux) / t;
        if (slack < best.value) best = {slack, t};
    }
    if (best.value == kInf) best.value = rhs;
    return best;
}

Trace raytrace_trace(const Surface& s, const Point2& x, const Vec2& g, int t_points) {
    const double ux = *s.value_at(x);
    // Specular reflection of (0, 0, -1) about the unit normal (-g, 1) / sqrt(1 + |g|^2).
    const double n2 = 1.0 + norm2(g);
    const double inv = 1.0 / std::sqrt(n2);
    const double nx = -g.x * inv, ny = -g.y * inv, nz = inv;
    const double dn = -nz;
    const double vx = -2.0 * dn * nx, vy = -2.0 * dn * ny, vz = -1.0 - 2.0 * dn * nz;
    const double vh = std::hypot(vx, vy);
    const Box b = s.bbox();
    const double diam = std::hypot(b.width(), b.height());
    if (vh == 0.0) return {vz * min_trace_fraction * diam, 0.0};
    const Vec2 dir{vx / vh, vy / vh};
    const double band = trace_band(s);
    Trace best;
    for (double ell : trace_grid(s, x, dir, t_points)) {
        const auto uy = trace_value(s, x + dir * ell, band);
        if (!uy) continue;
        const double sp = ell / vh;
        const double clearance = ux + sp * vz - *uy;
        if (clearance < best.value) best = {clearance, sp};
    }
    if (best.value == kInf) best.value = vz * min_trace_fraction * diam;
    return best;
}

Verdict classify(double v, double tol) {
    if (v < -tol) return Verdict::violation;
    if (v <= tol) return Verdict::tangent;
    return Verdict::pass;
}

double radical_inverse(std::uint64_t i, std::uint64_t base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

}  // namespace

double sic_analytic(const Surface& s, const Point2& x, int t_points) {
    return analytic_trace(s, x, regular_gradient(s, x), t_points).value;
}

double sic_raytrace(const Surface& s, const Point2& x, int t_points) {
    return raytrace_trace(s, x, regular_gradient(s, x), t_points).value;
}

SicSample sic_check(const Surface& s, const Point2& x, double tol, SicMode mode, int t_points) {
    SicSample out;
    out.x = x;
    out.gradient = regular_gradient(s, x);
    const Trace a = analytic_trace(s, x, out.gradient, t_points);
    const Trace r = raytrace_trace(s, x, out.gradient, t_points);
    out.residual_analytic = a.value;
    out.worst_t = a.at;
    out.raytrace_clearance = r.value;
    const Verdict va = classify(a.value, tol), vr = classify(r.value, tol);
    switch (mode) {
        case SicMode::analytic: out.verdict = va; break;
        case SicMode::raytrace: out.verdict = vr; break;
        case SicMode::both: out.verdict = std::max(va, vr); break;
    }
    return out;
}

std::vector<Point2> domain_samples(const Surface& s, Sampler sampler, std::size_t count, std::uint64_t seed) {
    std::vector<Point2> out;
    if (count == 0) return out;
    out.reserve(count);
    const Box b = s.bbox();
    const std::size_t max_attempts = count * 4096;
    auto accept = [&](const Point2& p) {
        if (s.contains(p, 0.0)) out.push_back(p);
        return out.size() >= count;
    };
    switch (sampler) {
        case Sampler::grid: {
            const double fill = std::max(s.area() / b.area(), 1e-6);
            for (double scale = 1.0; out.size() < count; scale *= 1.5) {
                out.clear();
                const auto side = static_cast<std::size_t>(std::ceil(scale * std::sqrt(count / fill)));
                if (side * side > max_attempts) break;
                for (std::size_t j = 0; j < side && out.size() < count; ++j)
                    for (std::size_t i = 0; i < side; ++i)
                        if (accept({b.min_x + (i + 0.5) * b.width() / side, b.min_y + (j + 0.5) * b.height() / side}))
                            break;
            }
            break;
        }
        case Sampler::halton:
            for (std::uint64_t i = 1; i <= max_attempts; ++i)
                if (accept({b.min_x + radical_inverse(i, 2) * b.width(), b.min_y + radical_inverse(i, 3) * b.height()}))
                    break;
            break;
        case Sampler::random: {
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> ux(b.min_x, b.max_x), uy(b.min_y, b.max_y);
            for (std::size_t i = 0; i < max_attempts; ++i) {
                const double px = ux(rng);
                if (accept({px, uy(rng)})) break;
            }
            break;
        }
    }
    return out;
}

SicReport sic_report(const Surface& s, const SicOptions& opt) {
    if (opt.samples == 0) throw Error(ErrorCode::invalid_parameter, "sic report needs at least one sample");
    const auto points = domain_samples(s, opt.sampler, opt.samples, opt.seed);
    struct Slot {
        bool regular = false;
        SicSample sample;
    };
    std::vector<Slot> slots(points.size());
    detail::parallel_for(points.size(), worker_count(opt.threads), [&](std::size_t i) {
        const SurfaceSample e = s.eval(points[i]);
        if (!e.regular) return;
        slots[i].regular = true;
        slots[i].sample = sic_check(s, points[i], opt.tol, opt.mode, opt.t_points);
    });

    SicReport rep;
    rep.samples = points.size();
    rep.tol = opt.tol;
    rep.mode = opt.mode;
    rep.worst_residual = kInf;
    rep.worst_clearance = kInf;
    for (const auto& slot : slots) {
        if (!slot.regular) {
            ++rep.skipped;
            continue;
        }
        const SicSample& x = slot.sample;
        ++rep.regular;
        rep.worst_residual = std::min(rep.worst_residual, x.residual_analytic);
        rep.worst_clearance = std::min(rep.worst_clearance, x.raytrace_clearance);
        if ((x.residual_analytic < -opt.tol && x.raytrace_clearance > opt.tol) ||
            (x.raytrace_clearance < -opt.tol && x.residual_analytic > opt.tol))
            ++rep.disagreements;
        if (x.verdict == Verdict::violation) {
            ++rep.violations;
            if (!rep.first_violation) rep.first_violation = x;
        } else if (x.verdict == Verdict::tangent) {
            ++rep.tangent;
        }
    }
    if (rep.regular == 0) rep.worst_residual = rep.worst_clearance = 0.0;
    return rep;
}

double gradient_bound_check(const Surface& s, std::size_t samples, Sampler sampler) {
    double best = 0.0;
    for (const auto& p : domain_samples(s, sampler, samples)) {
        const SurfaceSample e = s.eval(p);
        if (e.regular && e.gradient) best = std::max(best, norm(*e.gradient));
    }
    return best;
}

double focal_miss(const RadialParabola& g, const Point2& x) {
    const Vec2 grad = (x - g.focus) / g.focal;
    const double z = (norm2(x - g.focus) - g.r0 * g.r0) / (2.0 * g.focal);
    const double n2 = 1.0 + norm2(grad);
    const double vx = -2.0 * grad.x / n2, vy = -2.0 * grad.y / n2, vz = (1.0 - norm2(grad)) / n2;
    const double fz = 0.5 * g.focal - g.r0 * g.r0 / (2.0 * g.focal);
    // Distance from F to the line p + s v with |v| = 1.
    const double wx = g.focus.x - x.x, wy = g.focus.y - x.y, wz = fz - z;
    const double cx = wy * vz - wz * vy, cy = wz * vx - wx * vz, cz = wx * vy - wy * vx;
    return std::sqrt(cx * cx + cy * cy + cz * cz);
}

}  // namespace newton_sic

#pragma once

// Reference computations written without the library's geometry and quadrature code.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

struct P {
    double x, y;
};

inline double shoelace(const std::vector<P>& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const P& a = poly[i];
        const P& b = poly[(i + 1) % poly.size()];
        s += a.x * b.y - a.y * b.x;
    }
    return 0.5 * std::abs(s);
}

// Even-odd crossing test.
inline bool inside(const std::vector<P>& poly, P q) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const P& a = poly[i];
        const P& b = poly[j];
        if ((a.y > q.y) != (b.y > q.y) && q.x < (b.x - a.x) * (q.y - a.y) / (b.y - a.y) + a.x) in = !in;
    }
    return in;
}

/// Area of {p in box : pred(p)} by the midpoint rule on an n x n grid.
inline double grid_area(double x0, double y0, double x1, double y1, int n, const std::function<bool(P)>& pred) {
    const double hx = (x1 - x0) / n, hy = (y1 - y0) / n;
    std::uint64_t hits = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (pred({x0 + (i + 0.5) * hx, y0 + (j + 0.5) * hy})) ++hits;
    return static_cast<double>(hits) * hx * hy;
}

inline double union_area_raster(const std::vector<std::vector<P>>& polys, int n) {
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    for (const auto& p : polys)
        for (const auto& v : p) {
            x0 = std::min(x0, v.x);
            y0 = std::min(y0, v.y);
            x1 = std::max(x1, v.x);
            y1 = std::max(y1, v.y);
        }
    return grid_area(x0, y0, x1, y1, n, [&](P q) {
        for (const auto& p : polys)
            if (inside(p, q)) return true;
        return false;
    });
}

/// Closed form of the mean of 1/(1+|grad u|^2) for u = max(phi(|x1|+1/2), phi(|x2|+1/2)) on the
/// unit square: 8 * integral over s in [1/2, 1] of (s - 1/2)/(1 + s^2).
inline double resistance_ua() { return 4.0 * (std::log(1.6) - std::atan(1.0) + std::atan(0.5)); }

/// Midpoint rule for the Reuleaux baseline: |grad u| is the largest distance to a vertex.
inline double resistance_ub(int n) {
    const double s3 = std::sqrt(3.0);
    const std::array<P, 3> v{P{0.0, 1.0 / s3}, P{-0.5, -0.5 / s3}, P{0.5, -0.5 / s3}};
    const double x0 = -0.5, x1 = 0.5, y0 = -0.5 / s3, y1 = 1.0 / s3;
    // The Reuleaux triangle reaches 1 - dist(vertex, centroid) beyond each side.
    const double pad = 1.0 - 1.0 / s3;
    const double bx0 = x0 - pad, bx1 = x1 + pad, by0 = y0 - pad, by1 = y1 + pad;
    const double hx = (bx1 - bx0) / n, hy = (by1 - by0) / n;
    double sum = 0.0, area = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const P q{bx0 + (i + 0.5) * hx, by0 + (j + 0.5) * hy};
            double rmax = 0.0;
            for (const auto& c : v) rmax = std::max(rmax, std::hypot(q.x - c.x, q.y - c.y));
            if (rmax > 1.0) continue;
            area += hx * hy;
            sum += hx * hy / (1.0 + rmax * rmax);
        }
    return sum / area;
}

/// 3-D reflection of the downward unit vector about the graph normal (-g, 1).
inline std::array<double, 3> reflect_down(double gx, double gy) {
    const double len = std::sqrt(gx * gx + gy * gy + 1.0);
    const std::array<double, 3> n{-gx / len, -gy / len, 1.0 / len};
    const std::array<double, 3> d{0.0, 0.0, -1.0};
    const double dn = d[0] * n[0] + d[1] * n[1] + d[2] * n[2];
    return {d[0] - 2 * dn * n[0], d[1] - 2 * dn * n[1], d[2] - 2 * dn * n[2]};
}

/// Smallest j with (1 - density/2)^j < eps, by iteration.
inline int rounds(double density, double eps) {
    int j = 0;
    for (double v = 1.0; !(v < eps); v *= 1.0 - density / 2.0) ++j;
    return j;
}

/// Mean of 1/(1+|x-b|^2/r0^2) over a convex polygon by fan triangulation and a Monte Carlo draw
/// of `n` points per unit area fraction.
inline double dimple_mean_mc(const std::vector<P>& convex, P b, double r0, std::uint64_t n, std::uint64_t seed,
                             double* three_sigma) {
    std::vector<double> w;
    double total = 0.0;
    for (std::size_t i = 1; i + 1 < convex.size(); ++i) {
        w.push_back(shoelace({convex[0], convex[i], convex[i + 1]}));
        total += w.back();
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    double s = 0.0, s2 = 0.0;
    for (std::uint64_t k = 0; k < n; ++k) {
        const std::size_t t = pick(rng) + 1;
        double a = u01(rng), c = u01(rng);
        if (a + c > 1.0) {
            a = 1.0 - a;
            c = 1.0 - c;
        }
        const P& p0 = convex[0];
        const P& p1 = convex[t];
        const P& p2 = convex[t + 1];
        const P q{p0.x + a * (p1.x - p0.x) + c * (p2.x - p0.x), p0.y + a * (p1.y - p0.y) + c * (p2.y - p0.y)};
        const double r2 = ((q.x - b.x) * (q.x - b.x) + (q.y - b.y) * (q.y - b.y)) / (r0 * r0);
        const double f = 1.0 / (1.0 + r2);
        s += f;
        s2 += f * f;
    }
    const double mean = s / static_cast<double>(n);
    const double var = std::max(0.0, s2 / static_cast<double>(n) - mean * mean);
    if (three_sigma) *three_sigma = 3.0 * std::sqrt(var / static_cast<double>(n));
    return mean;
}

}  // namespace oracle

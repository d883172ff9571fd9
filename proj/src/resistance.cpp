#include "newton_sic/resistance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "newton_sic/errors.hpp"
#include "parallel.hpp"

namespace newton_sic {

const char* to_string(QuadratureMethod m) {
    switch (m) {
        case QuadratureMethod::deterministic: return "deterministic-quadrature";
        case QuadratureMethod::monte_carlo: return "monte-carlo";
        case QuadratureMethod::semi_analytic: return "semi-analytic";
    }
    return "unknown";
}

unsigned worker_count(unsigned requested) {
    unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("NEWTON_SIC_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return std::max(1u, n);
}

namespace {

using detail::parallel_for;

struct CellTask {
    const Formula* formula = nullptr;
    Polygon piece;              // convex ccw piece (polygonal task)
    const Shape* curved = nullptr;  // curved support (disk or reuleaux)
    Box root;
    double tau = 0.0;   // allowed half-range of the integrand per unit area
    double h_min = 0.0; // partial curved cells stop here
};

struct CellResult {
    double sum = 0.0;
    double error = 0.0;
    std::uint64_t cells = 0;
    bool converged = true;
};

class Integrator {
public:
    Integrator(const CellTask& task, const QuadratureOptions& opt, std::uint64_t budget)
        : t_(task), opt_(opt), budget_(budget) {}

    CellResult run() {
        visit(t_.root, 0);
        return r_;
    }

private:
    void accept(double area, const Range& rg, bool fine) {
        r_.sum += area * 0.5 * (rg.lo + rg.hi);
        r_.error += area * 0.5 * (rg.hi - rg.lo);
        if (!fine) r_.converged = false;
    }

    bool can_split(int depth) const { return depth < opt_.max_depth && r_.cells < budget_; }

    void split(const Box& b, int depth) {
        const double w = b.width(), h = b.height();
        const double mx = 0.5 * (b.min_x + b.max_x), my = 0.5 * (b.min_y + b.max_y);
        if (w > 2.0 * h) {
            visit({b.min_x, b.min_y, mx, b.max_y}, depth + 1);
            visit({mx, b.min_y, b.max_x, b.max_y}, depth + 1);
        } else if (h > 2.0 * w) {
            visit({b.min_x, b.min_y, b.max_x, my}, depth + 1);
            visit({b.min_x, my, b.max_x, b.max_y}, depth + 1);
        } else {
            visit({b.min_x, b.min_y, mx, my}, depth + 1);
            visit({mx, b.min_y, b.max_x, my}, depth + 1);
            visit({b.min_x, my, mx, b.max_y}, depth + 1);
            visit({mx, my, b.max_x, b.max_y}, depth + 1);
        }
    }

    void visit(const Box& b, int depth) {
        ++r_.cells;
        if (t_.curved) {
            visit_curved(b, depth);
            return;
        }
        const Polygon cell = clip_convex(box_polygon(b), t_.piece);
        if (cell.empty()) return;
        const double area = polygon_area(cell);
        if (area <= 0.0) return;
        const Range rg = integrand_range(*t_.formula, cell);
        const bool fine = 0.5 * (rg.hi - rg.lo) <= t_.tau;
        if (fine || !can_split(depth)) {
            accept(area, rg, fine);
            return;
        }
        split(b, depth);
    }

    void visit_curved(const Box& b, int depth) {
        const int rel = shape_box_relation(*t_.curved, b);
        if (rel < 0) return;
        const Polygon cell = box_polygon(b);
        const Range rg = integrand_range(*t_.formula, cell);
        if (rel > 0) {
            const bool fine = 0.5 * (rg.hi - rg.lo) <= t_.tau;
            if (fine || !can_split(depth)) {
                accept(b.area(), rg, fine);
                return;
            }
            split(b, depth);
            return;
        }
        if (std::max(b.width(), b.height()) > t_.h_min && can_split(depth)) {
            split(b, depth);
            return;
        }
        // Partial cell: the contribution lies in [0, area * hi]; estimate the covered fraction.
        constexpr int k = 4;
        int inside = 0;
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                const Point2 p{b.min_x + (i + 0.5) * b.width() / k, b.min_y + (j + 0.5) * b.height() / k};
                if (shape_contains(*t_.curved, p)) ++inside;
            }
        const double frac = static_cast<double>(inside) / (k * k);
        const double est = b.area() * frac * 0.5 * (rg.lo + rg.hi);
        r_.sum += est;
        r_.error += std::max(est, b.area() * rg.hi - est);
    }

    const CellTask& t_;
    const QuadratureOptions& opt_;
    std::uint64_t budget_;
    CellResult r_;
};

double outline_perimeter(const Shape& s) {
    const Polygon o = shape_outline(s, 256);
    double p = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) p += distance(o[i], o[(i + 1) % o.size()]);
    return p;
}

std::vector<Box> split_root(const Box& b, int k) {
    std::vector<Box> out;
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < k; ++i)
            out.push_back({b.min_x + b.width() * i / k, b.min_y + b.height() * j / k, b.min_x + b.width() * (i + 1) / k,
                           b.min_y + b.height() * (j + 1) / k});
    return out;
}

}  // namespace

ResistanceEstimate resistance_quadrature(const Surface& s, const QuadratureOptions& opt) {
    if (!(opt.target_error > 0.0)) throw Error(ErrorCode::invalid_parameter, "target error must be positive");
    const double omega = s.area();
    const double tau = 0.5 * opt.target_error;
    const int root_split = s.regions().size() < 16 ? 4 : 1;

    std::vector<CellTask> tasks;
    std::vector<std::optional<Shape>> shapes(s.regions().size());
    double exact = 0.0;
    double claimed_area = 0.0;
    std::optional<std::size_t> remainder;
    for (std::size_t r = 0; r < s.regions().size(); ++r) {
        const Region& region = s.regions()[r];
        if (std::holds_alternative<Remainder>(region.support)) {
            if (!std::holds_alternative<Flat>(region.formula))
                throw Error(ErrorCode::invalid_parameter, "remainder regions must be flat");
            remainder = r;
            continue;
        }
        shapes[r] = std::holds_alternative<WholeDomain>(region.support) ? std::optional<Shape>(s.domain())
                                                                         : s.support_shape(r);
        const Shape& shape = *shapes[r];
        const double area = shape_area(shape);
        claimed_area += area;
        if (std::holds_alternative<Flat>(region.formula)) {
            exact += area;
            continue;
        }
        if (std::holds_alternative<MultiPolygon>(shape))
            throw Error(ErrorCode::invalid_parameter, "non-flat formulas need a single polygon or curved support");
        if (std::holds_alternative<Polygon>(shape)) {
            for (auto& piece : shape_convex_pieces(shape)) {
                const Box bb = bounding_box(piece);
                for (const Box& root : split_root(bb, root_split)) {
                    CellTask t;
                    t.formula = &region.formula;
                    t.piece = piece;
                    t.root = root;
                    t.tau = tau;
                    tasks.push_back(std::move(t));
                }
            }
        } else {
            const double h_min = opt.target_error * omega / (2.25 * outline_perimeter(shape));
            for (const Box& root : split_root(shape_bbox(shape), root_split)) {
                CellTask t;
                t.formula = &region.formula;
                t.curved = &*shapes[r];
                t.root = root;
                t.tau = tau;
                t.h_min = h_min;
                tasks.push_back(std::move(t));
            }
        }
    }
    if (remainder) exact += std::max(0.0, omega - claimed_area);

    std::vector<CellResult> results(tasks.size());
    const std::uint64_t budget = std::max<std::uint64_t>(64, opt.max_cells / std::max<std::size_t>(1, tasks.size()));
    parallel_for(tasks.size(), worker_count(opt.threads),
                 [&](std::size_t i) { results[i] = Integrator(tasks[i], opt, budget).run(); });

    ResistanceEstimate est;
    est.method = QuadratureMethod::deterministic;
    double sum = exact, err = 0.0;
    for (const auto& r : results) {
        sum += r.sum;
        err += r.error;
        est.work += r.cells;
        est.converged = est.converged && r.converged;
    }
    est.value = sum / omega;
    est.error = err / omega;
    if (est.error > opt.target_error) est.converged = false;
    return est;
}

ResistanceEstimate resistance_monte_carlo(const Surface& s, const MonteCarloOptions& opt) {
    if (opt.samples == 0) throw Error(ErrorCode::invalid_parameter, "monte-carlo needs at least one sample");
    constexpr std::uint64_t kBatch = 1 << 15;
    const std::uint64_t batches = (opt.samples + kBatch - 1) / kBatch;
    const Box box = s.bbox();
    struct Acc {
        double sum = 0.0, sum2 = 0.0;
        std::uint64_t n = 0;
    };
    std::vector<Acc> acc(batches);
    parallel_for(batches, worker_count(opt.threads), [&](std::size_t b) {
        std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> ux(box.min_x, box.max_x), uy(box.min_y, box.max_y);
        const std::uint64_t draws = std::min(kBatch, opt.samples - b * kBatch);
        Acc a;
        for (std::uint64_t i = 0; i < draws; ++i) {
            const Point2 p{ux(rng), uy(rng)};
            if (!s.contains(p, 0.0)) continue;
            const double f = s.integrand(p);
            a.sum += f;
            a.sum2 += f * f;
            ++a.n;
        }
        acc[b] = a;
    });
    Acc total;
    for (const auto& a : acc) {
        total.sum += a.sum;
        total.sum2 += a.sum2;
        total.n += a.n;
    }
    if (total.n < 2) throw Error(ErrorCode::resource_limit, "too few monte-carlo samples landed in the domain");
    const double n = static_cast<double>(total.n);
    const double mean = total.sum / n;
    const double var = std::max(0.0, (total.sum2 - n * mean * mean) / (n - 1.0));
    ResistanceEstimate est;
    est.method = QuadratureMethod::monte_carlo;
    est.value = mean;
    est.error = 3.0 * std::sqrt(var / n);
    est.work = total.n;
    est.seed = opt.seed;
    return est;
}

ResistanceEstimate trap_resistance_semianalytic(const BigTriangle& tri, double tolerance) {
    tri.validate();
    const double area = polygon_area(tri.trapezoid());
    const double r0 = tri.r0();
    if (!(area > 1e-14 * r0 * r0)) throw Error(ErrorCode::invalid_geometry, "degenerate trapezoid");
    const Vec2 ba = (tri.a - tri.b) / distance(tri.a, tri.b);
    const Vec2 bc = (tri.c - tri.b) / distance(tri.c, tri.b);
    const double alpha = std::acos(std::clamp(dot(ba, bc), -1.0, 1.0));
    const double turn = cross(ba, bc) >= 0.0 ? 1.0 : -1.0;
    const Vec2 mn = tri.n - tri.m, ac = tri.c - tri.a;
    const double num_in = cross(tri.m - tri.b, mn), num_out = cross(tri.a - tri.b, ac);
    auto radial = [&](double phi) {
        const double c = std::cos(turn * phi), s = std::sin(turn * phi);
        const Vec2 u{c * ba.x - s * ba.y, s * ba.x + c * ba.y};
        const double r_in = num_in / cross(u, mn);
        const double r_out = num_out / cross(u, ac);
        return 0.5 * r0 * r0 * (std::log1p(r_out * r_out / (r0 * r0)) - std::log1p(r_in * r_in / (r0 * r0)));
    };
    double err = 0.0;
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(radial, 0.0, alpha, 15, tolerance, &err);
    ResistanceEstimate est;
    est.method = QuadratureMethod::semi_analytic;
    est.value = integral / area;
    est.error = err / area + 64.0 * std::numeric_limits<double>::epsilon();
    est.work = 61;
    return est;
}

double resistance_bound(double trap_area, double small_area, double kappa_min) {
    if (!(trap_area >= 0.0) || !(small_area >= 0.0) || !(trap_area + small_area > 0.0))
        throw Error(ErrorCode::invalid_parameter, "bound needs non-negative areas with a positive sum");
    if (!(kappa_min > 0.0 && kappa_min <= 1.0)) throw Error(ErrorCode::invalid_parameter, "kappa must be in (0, 1]");
    const double total = trap_area + small_area;
    return trap_area / total / (1.0 + kappa_min * kappa_min) + small_area / total;
}

BoundInputs BoundInputs::make(double n, double a) {
    if (!(n >= 1.0) || !std::isfinite(n)) throw Error(ErrorCode::invalid_parameter, "bound inputs need n >= 1");
    if (!(a > 0.0)) throw Error(ErrorCode::invalid_parameter, "bound inputs need a > 0");
    BoundInputs b;
    b.n = n;
    b.a = a;
    const double rn = std::sqrt(n);
    b.trap_area_lower = a * rn;
    b.small_area_upper = a * (std::log(n) + 1.5);
    const double tail = std::ldexp(a, -static_cast<int>(std::min(n, 4000.0)));
    b.kappa_lower = (n + 1.0) / (n + 1.0 + rn) - tail / (n + 1.0 + rn);
    return b;
}

std::vector<std::pair<double, double>> bound_curve(const std::vector<double>& n_values, double a) {
    std::vector<std::pair<double, double>> out;
    out.reserve(n_values.size());
    for (double n : n_values) out.emplace_back(n, BoundInputs::make(n, a).bound());
    return out;
}

}  // namespace newton_sic

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "newton_sic/surface.hpp"

namespace newton_sic {

enum class SicMode { analytic, raytrace, both };
enum class Verdict { pass, tangent, violation };
enum class Sampler { grid, halton, random };

const char* to_string(SicMode m);
const char* to_string(Verdict v);
const char* to_string(Sampler s);

struct SicOptions {
    std::size_t samples = 10'000;
    double tol = 1e-9;
    SicMode mode = SicMode::both;
    Sampler sampler = Sampler::halton;
    std::uint64_t seed = 1;  // random sampler only
    int t_points = 64;       // geometric back-trace grid
    unsigned threads = 0;
};

/// Back-trace ell = |x - y| is sampled on a geometric grid from min_trace_fraction * diam to the
/// last domain crossing, plus that crossing and every region crossing.
inline constexpr double min_trace_fraction = 1e-6;

struct SicSample {
    Point2 x;
    Vec2 gradient;
    double residual_analytic = 0.0;   // min over t of (1 - |g|^2)/2 - (u(x - t g) - u(x))/t
    double raytrace_clearance = 0.0;  // min over the reflected ray of z - u(projection)
    double worst_t = 0.0;             // back-trace parameter of the analytic minimum
    Verdict verdict = Verdict::pass;
};

/// Throws not_regular when the gradient is undefined at x.
double sic_analytic(const Surface& s, const Point2& x, int t_points = 64);
double sic_raytrace(const Surface& s, const Point2& x, int t_points = 64);

/// Both checks at one regular point with the verdict for `mode`.
SicSample sic_check(const Surface& s, const Point2& x, double tol, SicMode mode = SicMode::both, int t_points = 64);

struct SicReport {
    std::size_t samples = 0;
    std::size_t regular = 0;
    std::size_t skipped = 0;  // non-regular sample points
    std::size_t violations = 0;
    std::size_t tangent = 0;
    std::size_t disagreements = 0;  // analytic and raytrace signs differ beyond tol
    double worst_residual = 0.0;
    double worst_clearance = 0.0;
    double tol = 0.0;
    SicMode mode = SicMode::both;
    std::optional<SicSample> first_violation;

    bool certified() const { return violations == 0; }
};

/// In-domain sample points: a centred grid, a Halton sequence, or seeded uniform draws.
std::vector<Point2> domain_samples(const Surface& s, Sampler sampler, std::size_t count, std::uint64_t seed = 1);

SicReport sic_report(const Surface& s, const SicOptions& options = {});

/// Max |grad u| over the regular points among `samples` domain samples.
double gradient_bound_check(const Surface& s, std::size_t samples = 10'000, Sampler sampler = Sampler::halton);

/// Distance from the focal point of the paraboloid g to the line of the ray reflected at x.
double focal_miss(const RadialParabola& g, const Point2& x);

}  // namespace newton_sic

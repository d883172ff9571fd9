// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any criterion fails.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "newton_sic/constructions.hpp"
#include "newton_sic/resistance.hpp"
#include "newton_sic/sic.hpp"
#include "oracles.hpp"

using namespace newton_sic;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& why) {
        if (ok) return;
        if (pass) detail = "first failure: " + why + "; " + detail;
        pass = false;
    }
};

constexpr int kMaxGeneration = 8;

// Surfaces and deterministic resistances shared between criteria.
struct Catalog {
    Surface ua = baseline_ua();
    Surface ub = baseline_ub();
    std::vector<Besicovitch> besic;  // index n - 1
    std::map<std::string, ResistanceEstimate> quad;
    std::optional<Surface> transferred;  // u^a packed into a 64-gon

    Catalog() {
        for (int n = 1; n <= kMaxGeneration; ++n) besic.push_back(besicovitch(n));
    }

    const Surface& surface(int n) const { return besic[static_cast<std::size_t>(n - 1)].surface; }

    std::vector<std::pair<std::string, const Surface*>> admissible() const {
        std::vector<std::pair<std::string, const Surface*>> out{{"ua", &ua}, {"ub", &ub}};
        for (int n = 1; n <= kMaxGeneration; ++n) out.emplace_back("besicovitch-" + std::to_string(n), &surface(n));
        return out;
    }

    /// The admissible surfaces plus the transferred surface once it exists.
    std::vector<std::pair<std::string, const Surface*>> all() const {
        auto out = admissible();
        if (transferred) out.emplace_back("transfer", &*transferred);
        return out;
    }

    const ResistanceEstimate& resistance(const std::string& name, const Surface& s) {
        auto it = quad.find(name);
        if (it == quad.end()) it = quad.emplace(name, resistance_quadrature(s)).first;
        return it->second;
    }
};

Outcome baseline_reproduction(Catalog& cat) {
    Outcome o;
    for (auto [name, target, s] : {std::tuple{"ua", 0.593, &cat.ua}, std::tuple{"ub", 0.581, &cat.ub}}) {
        const auto t = Clock::now();
        const auto& e = cat.resistance(name, *s);
        const double dt = seconds_since(t);
        o.require(std::abs(e.value - target) <= 0.002, fmt("%s R = %.6f outside %.3f +/- 0.002", name, e.value, target));
        o.require(e.converged, fmt("%s quadrature did not converge", name));
        o.require(dt < 60.0, fmt("%s took %.1f s", name, dt));
        o.detail += fmt("%s%s R = %.6f +/- %.1e (%.1f s)", o.detail.empty() ? "" : ", ", name, e.value, e.error, dt);
    }
    return o;
}

Outcome sic_certification(Catalog& cat) {
    Outcome o;
    SicOptions opt;
    opt.samples = 10'000;
    opt.tol = 1e-9;
    opt.mode = SicMode::both;
    std::size_t tangent = 0;
    double worst = 0.0;
    for (const auto& [name, s] : cat.admissible()) {
        const SicReport r = sic_report(*s, opt);
        o.require(r.violations == 0, fmt("%s has %zu violations", name.c_str(), r.violations));
        o.require(r.regular >= 9'000, fmt("%s has only %zu regular samples", name.c_str(), r.regular));
        tangent += r.tangent;
        worst = std::min({worst, r.worst_residual, r.worst_clearance});
    }
    SicOptions cone_opt = opt;
    cone_opt.samples = 1'000;
    const SicReport cone = sic_report(cone_fixture(1.2), cone_opt);
    o.require(!cone.certified(), "cone fixture was certified");
    o.detail += fmt("ua, ub, besicovitch 1..%d: 0 violations at 1e4 samples each (%zu tangent, worst %.1e); cone: %zu/%zu "
                    "violations",
                    kMaxGeneration, tangent, worst, cone.violations, cone.regular);
    return o;
}

Outcome family_properties(Catalog& cat) {
    Outcome o;
    const double a = 1.0;
    // (a), (b): area growth and kappa bound up to n = 12.
    double worst_s = 0.0, worst_k = 1.0;
    for (int n = 1; n <= 12; ++n) {
        FamilyOptions f;
        f.generation = n;
        f.base_length = a;
        f.measure_each_step = false;
        const DoublingFamily fam = build_family(f);
        const double s_bound = a * (std::log(n) + 1.5);
        o.require(fam.small_union_area + fam.small_union_error < s_bound, fmt("S_%d = %.6f >= %.6f", n, fam.small_union_area, s_bound));
        o.require(fam.trap_area > a * std::sqrt(n), fmt("|trap^%d| = %.6f <= %.6f", n, fam.trap_area, a * std::sqrt(n)));
        const double rn = std::sqrt(static_cast<double>(n));
        const double k_bound = (n + 1) / (n + 1 + rn) - std::ldexp(a, -n) / (n + 1 + rn);
        o.require(fam.kappa_min >= k_bound, fmt("kappa_min(%d) = %.9f < %.9f", n, fam.kappa_min, k_bound));
        worst_s = std::max(worst_s, (fam.small_union_area + fam.small_union_error) / s_bound);
        worst_k = std::min(worst_k, fam.kappa_min - k_bound);
    }
    // (c): measured resistance below the measured bound, strictly decreasing.
    double prev_hi = 2.0;
    std::string rs;
    for (int n : {2, 4, 6, 8}) {
        const auto& fam = cat.besic[static_cast<std::size_t>(n - 1)].family;
        const auto& e = cat.resistance("besicovitch-" + std::to_string(n), cat.surface(n));
        const double bound = resistance_bound(fam.trap_area, fam.small_union_area, fam.kappa_min);
        o.require(e.value <= bound + e.error, fmt("R_%d = %.6f above bound %.6f", n, e.value, bound));
        o.require(e.value + e.error < prev_hi, fmt("R_%d not strictly below R_%d", n, n - 2));
        prev_hi = e.value - e.error;
        rs += fmt("%.4f ", e.value);
    }
    // (d): bound arithmetic.
    const double b6 = BoundInputs::make(1e6, a).bound(), b12 = BoundInputs::make(1e12, a).bound();
    o.require(b6 <= 0.51, fmt("bound(1e6) = %.6f", b6));
    o.require(b12 <= 0.5005, fmt("bound(1e12) = %.6f", b12));
    std::vector<double> ns;
    for (double n = 100; n <= 1e15; n *= 1.25) ns.push_back(n);
    const auto curve = bound_curve(ns, a);
    for (std::size_t i = 1; i < curve.size(); ++i)
        o.require(curve[i].second < curve[i - 1].second && curve[i].second > 0.5,
                  fmt("bound not monotone toward 1/2 at n = %.3g", curve[i].first));
    o.detail += fmt("max S_n/(ln n + 1.5) = %.3f, min kappa slack %.2e, R(2,4,6,8) = %sbound(1e6) = %.5f, bound(1e12) = "
                    "%.6f",
                    worst_s, worst_k, rs.c_str(), b6, b12);
    return o;
}

Outcome structural_invariants() {
    Outcome o;
    double overlap = 0.0, partition = 0.0, rb = 0.0;
    for (int n = 1; n <= 10; ++n) {
        FamilyOptions f;
        f.generation = n;
        f.measure_each_step = false;
        const DoublingFamily fam = build_family(f);
        const FamilyCheck c = check_family(fam, 1e-10, 10);
        o.require(c.full_pairwise, fmt("n = %d not checked pairwise", n));
        o.require(c.trapezoids.disjoint && c.trapezoids.worst_overlap < 1e-10,
                  fmt("n = %d overlap %.2e", n, c.trapezoids.worst_overlap));
        o.require(c.partition_error <= 1e-12 && fam.max_partition_error <= 1e-12,
                  fmt("n = %d partition error %.2e", n, std::max(c.partition_error, fam.max_partition_error)));
        o.require(fam.max_rb_ratio_error <= 1e-9, fmt("n = %d |RB| error %.2e", n, fam.max_rb_ratio_error));
        overlap = std::max(overlap, c.trapezoids.worst_overlap);
        partition = std::max({partition, c.partition_error, fam.max_partition_error});
        rb = std::max(rb, fam.max_rb_ratio_error);
    }
    o.detail += fmt("n = 1..10 full pairwise: worst overlap %.1e, partition %.1e, |RB| relative %.1e", overlap, partition, rb);
    return o;
}

Outcome sic_equivalence(Catalog& cat) {
    Outcome o;
    SicOptions opt;
    opt.samples = 10'000;
    opt.sampler = Sampler::random;
    opt.seed = 2024;
    std::size_t checked = 0;
    for (const auto& [name, s] : cat.admissible()) {
        const SicReport r = sic_report(*s, opt);
        o.require(r.disagreements == 0, fmt("%s: %zu sign disagreements", name.c_str(), r.disagreements));
        checked += r.regular;
    }
    // Focal property on paraboloid points of the largest surface.
    const Surface& s = cat.surface(kMaxGeneration);
    double worst = 0.0;
    std::size_t focal = 0;
    for (const auto& p : domain_samples(s, Sampler::random, 4'000, 7)) {
        if (focal == 1'000) break;
        const SurfaceSample e = s.eval(p);
        if (!e.regular || e.region < 0) continue;
        const auto* g = std::get_if<RadialParabola>(&s.regions()[static_cast<std::size_t>(e.region)].formula);
        if (!g) continue;
        const double miss = focal_miss(*g, p);
        // Independent reflection: distance from the focus to the reflected line.
        const auto v = oracle::reflect_down(e.gradient->x, e.gradient->y);
        const double fz = 0.5 * g->focal - g->r0 * g->r0 / (2 * g->focal);
        const double wx = g->focus.x - p.x, wy = g->focus.y - p.y, wz = fz - e.value;
        const double cx = wy * v[2] - wz * v[1], cy = wz * v[0] - wx * v[2], cz = wx * v[1] - wy * v[0];
        const double miss_oracle = std::sqrt(cx * cx + cy * cy + cz * cz);
        o.require(miss <= 1e-9 * g->r0 && miss_oracle <= 1e-9 * g->r0, fmt("focal miss %.2e at (%.6f, %.6f)", miss, p.x, p.y));
        worst = std::max({worst, miss / g->r0, miss_oracle / g->r0});
        ++focal;
    }
    o.require(focal == 1'000, fmt("only %zu paraboloid samples", focal));
    o.detail += fmt("%zu random regular samples with matching signs; focal miss <= %.1e r0 on %zu samples", checked, worst, focal);
    return o;
}

Outcome transfer_criterion(Catalog& cat) {
    Outcome o;
    const Polygon disk = regular_polygon(64, 1.0);
    const PackingLayout l = pack_copies(cat.ua.domain(), disk, 0.05);
    o.require(l.uncovered_fraction < 0.05, fmt("uncovered fraction %.4f", l.uncovered_fraction));
    for (int j = 1; j <= l.rounds; ++j) {
        const double law = std::pow(1 - l.density / 2, j) * l.target_area;
        o.require(l.leftover_after_round[static_cast<std::size_t>(j)] < law,
                  fmt("round %d leftover %.4f >= %.4f", j, l.leftover_after_round[static_cast<std::size_t>(j)], law));
    }
    QuadratureOptions q;
    q.target_error = 5e-3;
    q.max_cells = 200'000'000;
    cat.transferred = transfer(cat.ua, l);
    const auto& transferred = cat.quad.emplace("transfer", resistance_quadrature(*cat.transferred, q)).first->second;
    const auto& ru = cat.resistance("ua", cat.ua);
    o.require(transferred.converged, "transfer quadrature did not converge");
    o.require(transferred.value < ru.value + 0.05 + ru.error + transferred.error,
              fmt("R(u~) = %.6f not below %.6f", transferred.value, ru.value + 0.05 + ru.error + transferred.error));
    o.detail += fmt("%zu copies in %d rounds, uncovered %.4f, R(u~) = %.4f +/- %.1e vs R(ua) + 0.05 = %.4f", l.copies.size(),
                    l.rounds, l.uncovered_fraction, transferred.value, transferred.error, ru.value + 0.05);
    return o;
}

BigTriangle random_triangle(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> len(0.2, 2.0), delta(0.1, 1.5), coin(0.0, 1.0);
    BigTriangle t = make_initial_triangle(len(rng), len(rng), len(rng));
    const int steps = static_cast<int>(coin(rng) * 3.0);
    for (int i = 0; i < steps; ++i) {
        const DoublingResult r = delta_double(t, delta(rng));
        t = coin(rng) < 0.5 ? r.left : r.right;
    }
    return t;
}

Outcome oracle_agreement(Catalog& cat) {
    Outcome o;
    double worst_ratio = 0.0;
    std::size_t pairs = 0;
    for (const auto& [name, s] : cat.all()) {
        const auto& d = cat.resistance(name, *s);
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            MonteCarloOptions m;
            m.samples = 1'000'000;
            m.seed = seed;
            const auto mc = resistance_monte_carlo(*s, m);
            const double gap = std::abs(d.value - mc.value);
            o.require(gap <= d.error + mc.error, fmt("%s seed %llu: |%.6f - %.6f| > %.1e", name.c_str(),
                                                     static_cast<unsigned long long>(seed), d.value, mc.value,
                                                     d.error + mc.error));
            worst_ratio = std::max(worst_ratio, gap / (d.error + mc.error));
            ++pairs;
        }
    }
    std::mt19937_64 rng(99);
    double worst_tri = 0.0;
    for (int i = 0; i < 50; ++i) {
        const BigTriangle t = random_triangle(rng);
        const auto sa = trap_resistance_semianalytic(t);
        const Surface trap(Polygon(t.trapezoid()), {Region{RadialParabola{t.b, t.r0(), t.r0()}, WholeDomain{}}}, 1.0);
        const auto q = resistance_quadrature(trap);
        const double gap = std::abs(sa.value - q.value);
        o.require(gap <= sa.error + q.error, fmt("triangle %d: |%.6f - %.6f| > %.1e", i, sa.value, q.value, sa.error + q.error));
        o.require(sa.value <= 1 / (1 + t.kappa() * t.kappa()) + 1e-9, fmt("triangle %d above 1/(1+kappa^2)", i));
        worst_tri = std::max(worst_tri, gap / (sa.error + q.error));
    }
    o.detail += fmt("%zu quadrature/MC pairs, worst gap %.2f of combined error; 50 trapezoids, worst gap %.2f of combined "
                    "error",
                    pairs, worst_ratio, worst_tri);
    return o;
}

Outcome lower_bound(Catalog& cat) {
    Outcome o;
    double lowest = 1.0;
    for (const auto& [name, s] : cat.all()) {
        const auto& e = cat.resistance(name, *s);
        o.require(e.value - e.error > 0.5, fmt("%s R = %.6f +/- %.1e", name.c_str(), e.value, e.error));
        lowest = std::min(lowest, e.value - e.error);
    }
    double prev_hi = 0.0;
    std::string rs;
    SicOptions sic;
    sic.samples = 1'000;
    for (double lambda : {1.0, 0.5, 0.25, 0.125}) {
        const Surface s = shrink(cat.ua, lambda);
        o.require(sic_report(s, sic).violations == 0, fmt("shrink %.3f violates SIC", lambda));
        const auto e = resistance_quadrature(s);
        o.require(e.value - e.error > prev_hi, fmt("R(%.3f ua) = %.6f does not increase", lambda, e.value));
        o.require(e.value + e.error < 1.0, fmt("R(%.3f ua) reaches 1", lambda));
        o.require(e.value - e.error > 0.5, fmt("R(%.3f ua) not above 1/2", lambda));
        prev_hi = e.value + e.error;
        rs += fmt("%.4f ", e.value);
    }
    o.detail += fmt("lowest R - error %.4f over %zu surfaces; shrink 1, 1/2, 1/4, 1/8: %s", lowest,
                    cat.all().size(), rs.c_str());
    return o;
}

}  // namespace

int main() {
    const auto start = Clock::now();
    Catalog cat;
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"baseline reproduction", [&] { return baseline_reproduction(cat); }},
        {"SIC certification", [&] { return sic_certification(cat); }},
        {"Besicovitch family properties", [&] { return family_properties(cat); }},
        {"structural invariants", [] { return structural_invariants(); }},
        {"SIC equivalence and focal property", [&] { return sic_equivalence(cat); }},
        {"packing and transfer", [&] { return transfer_criterion(cat); }},
        {"oracle agreement", [&] { return oracle_agreement(cat); }},
        {"strict lower bound and shrink sequence", [&] { return lower_bound(cat); }},
    };
    int passed = 0, index = 0;
    for (const auto& [name, run] : criteria) {
        ++index;
        const auto t = Clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        passed += o.pass;
        std::printf("%s  %d  %s [%.1f s]: %s\n", o.pass ? "PASS" : "FAIL", index, name, seconds_since(t), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed in %.1f s\n", passed, criteria.size(), seconds_since(start));
    return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}

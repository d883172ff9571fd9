#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "newton_sic/constructions.hpp"
#include "newton_sic/resistance.hpp"
#include "oracles.hpp"

using namespace newton_sic;

TEST_CASE("flat surface has resistance exactly one") {
    const auto e = resistance_quadrature(flat_fixture());
    CHECK(e.value == 1.0);
    CHECK(e.error == 0.0);
    MonteCarloOptions mc;
    mc.samples = 10'000;
    CHECK(resistance_monte_carlo(flat_fixture(), mc).value == 1.0);
}

TEST_CASE("ua quadrature against the closed form") {
    const auto e = resistance_quadrature(baseline_ua());
    const double ref = oracle::resistance_ua();
    CHECK(ref == doctest::Approx(0.593).epsilon(2e-5));
    CHECK(std::abs(e.value - ref) <= e.error);
    CHECK(e.error <= 1e-3);
    CHECK(e.converged);
}

TEST_CASE("ub quadrature against a midpoint oracle") {
    const auto e = resistance_quadrature(baseline_ub());
    const double ref = oracle::resistance_ub(3000);
    // The midpoint oracle carries an O(h) boundary error, about 1e-3 at this grid.
    CHECK(std::abs(e.value - ref) <= e.error + 2e-3);
    CHECK(std::abs(e.value - 0.581) <= 0.002);
}

TEST_CASE("monte carlo is reproducible and seed dependent") {
    MonteCarloOptions o;
    o.samples = 50'000;
    o.seed = 7;
    const Surface u = baseline_ua();
    const auto a = resistance_monte_carlo(u, o), b = resistance_monte_carlo(u, o);
    CHECK(a.value == b.value);
    o.seed = 8;
    CHECK(resistance_monte_carlo(u, o).value != a.value);
    o.threads = 1;
    o.seed = 7;
    CHECK(resistance_monte_carlo(u, o).value == a.value);
    CHECK(std::abs(a.value - oracle::resistance_ua()) <= a.error);
}

TEST_CASE("quadrature reduction does not depend on the worker count") {
    QuadratureOptions o;
    o.threads = 1;
    const Surface s = besicovitch(3).surface;
    const auto a = resistance_quadrature(s, o);
    o.threads = 3;
    const auto b = resistance_quadrature(s, o);
    CHECK(a.value == b.value);
    CHECK(a.error == b.error);
}

TEST_CASE("quadrature budget") {
    QuadratureOptions o;
    o.target_error = 1e-9;
    o.max_cells = 1000;
    const auto e = resistance_quadrature(baseline_ua(), o);
    CHECK_FALSE(e.converged);
}

TEST_CASE("semi-analytic trapezoid mean") {
    const BigTriangle t = make_initial_triangle(1, 1, 1);
    const auto e = trap_resistance_semianalytic(t);
    CHECK(e.value <= 1 / (1 + t.kappa() * t.kappa()) + 1e-9);
    std::vector<oracle::P> trap;
    for (const auto& p : t.trapezoid()) trap.push_back({p.x, p.y});
    double err = 0.0;
    const double mc = oracle::dimple_mean_mc(trap, {t.b.x, t.b.y}, t.r0(), 400'000, 3, &err);
    CHECK(std::abs(e.value - mc) <= e.error + err);
}

TEST_CASE("semi-analytic mean tends to one half as kappa tends to one") {
    // Small height h over trapezoid height d fixes kappa; a narrow base keeps r0 close to h + d.
    const double h = 1.0, d = 1.0 / 0.995 - 1.0;
    const BigTriangle t = make_initial_triangle(1e-3, d, h);
    CHECK(t.kappa() == doctest::Approx(0.995).epsilon(1e-5));
    const auto e = trap_resistance_semianalytic(t);
    CHECK(e.value == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("resistance bound arithmetic") {
    CHECK(resistance_bound(1.0, 1.0, 1.0) == doctest::Approx(0.75));
    CHECK(resistance_bound(1.0, 0.0, 1.0) == doctest::Approx(0.5));
    CHECK(resistance_bound(1.0, 0.0, 1.0 - 1e-9) == doctest::Approx(0.5));
}

TEST_CASE("bound curve") {
    const auto a = BoundInputs::make(1e6, 1.0);
    CHECK(a.bound() <= 0.51);
    CHECK(a.bound() == doctest::Approx(0.508).epsilon(1e-3));
    CHECK(BoundInputs::make(1e12, 1.0).bound() <= 0.5005);
    std::vector<double> ns;
    for (double n = 100; n <= 1e12; n *= 1.5) ns.push_back(n);
    const auto curve = bound_curve(ns, 1.0);
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].second < curve[i - 1].second);
    CHECK(curve.back().second > 0.5);
}

TEST_CASE("measured bound dominates measured resistance") {
    const Besicovitch b = besicovitch(4);
    const auto& f = b.family;
    const auto e = resistance_quadrature(b.surface);
    CHECK(e.value <= resistance_bound(f.trap_area, f.small_union_area, f.kappa_min) + e.error);
    CHECK(e.value - e.error > 0.5);
}

TEST_CASE("thread cap from the environment") {
    ::setenv("NEWTON_SIC_THREADS", "1", 1);
    CHECK(worker_count(0) == 1);
    CHECK(worker_count(8) == 1);
    ::unsetenv("NEWTON_SIC_THREADS");
    CHECK(worker_count(2) == 2);
}

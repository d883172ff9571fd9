#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "newton_sic/doubling.hpp"
#include "newton_sic/surface.hpp"

namespace newton_sic {

enum class QuadratureMethod { deterministic, monte_carlo, semi_analytic };

const char* to_string(QuadratureMethod m);

struct ResistanceEstimate {
    double value = 0.0;
    double error = 0.0;  // absolute; rigorous for deterministic, 3 sigma for monte-carlo
    QuadratureMethod method = QuadratureMethod::deterministic;
    std::uint64_t work = 0;  // cells or accepted samples
    std::uint64_t seed = 0;
    bool converged = true;
};

struct QuadratureOptions {
    double target_error = 1e-3;
    std::uint64_t max_cells = 20'000'000;
    int max_depth = 40;
    unsigned threads = 0;  // 0: hardware concurrency capped by NEWTON_SIC_THREADS
};

/// Deterministic adaptive quadrature of (1/|Omega|) * integral of 1/(1+|grad u|^2).
ResistanceEstimate resistance_quadrature(const Surface& s, const QuadratureOptions& options = {});

struct MonteCarloOptions {
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

ResistanceEstimate resistance_monte_carlo(const Surface& s, const MonteCarloOptions& options = {});

/// Mean of 1/(1+|grad u|^2) over the trapezoid of the dimple, by polar integration about B with
/// the closed-form radial integral and adaptive Gauss-Kronrod quadrature in the angle.
ResistanceEstimate trap_resistance_semianalytic(const BigTriangle& tri, double tolerance = 1e-12);

/// |trap| / (|trap| + |small|) / (1 + kappa^2) + |small| / (|trap| + |small|)
double resistance_bound(double trap_area, double small_area, double kappa_min);

struct BoundInputs {
    double n = 1.0;
    double a = 1.0;
    double trap_area_lower = 0.0;
    double small_area_upper = 0.0;
    double kappa_lower = 0.0;

    static BoundInputs make(double n, double a);
    double bound() const { return resistance_bound(trap_area_lower, small_area_upper, kappa_lower); }
};

std::vector<std::pair<double, double>> bound_curve(const std::vector<double>& n_values, double a);

/// Worker count from NEWTON_SIC_THREADS and the hardware; `requested` 0 means automatic.
unsigned worker_count(unsigned requested);

}  // namespace newton_sic

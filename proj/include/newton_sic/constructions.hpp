#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "newton_sic/doubling.hpp"
#include "newton_sic/surface.hpp"

namespace newton_sic {

/// phi(r) = (r^2 - 1) / 2
inline double phi(double r) { return 0.5 * (r * r - 1.0); }

/// Square (-1/2, 1/2)^2 with u = max(phi(|x1| + 1/2), phi(|x2| + 1/2)).
Surface baseline_ua();

/// Reuleaux triangle over the unit equilateral triangle with u = max(phi(r_A), phi(r_B), phi(r_C)).
Surface baseline_ub();

struct Besicovitch {
    DoublingFamily family;
    Surface surface;
};

/// Family of generation n with |MN| = a and trapezoid height d (default sqrt(n)), assembled
/// with the minimal common depth unless `c` is given.
Besicovitch besicovitch(int n, double a = 1.0, std::optional<double> d = std::nullopt,
                        std::optional<double> c = std::nullopt, const FamilyOptions& base = {});

/// u = level on the unit square (0, 1)^2.
Surface flat_fixture(double level = -0.25);

/// u = slope (|x| - 1) on the unit disk.
Surface cone_fixture(double slope = 1.2);

/// Regular polygon inscribed in the circle of `radius` about `center`, first vertex on the x-axis.
Polygon regular_polygon(int sides, double radius = 1.0, Point2 center = {});

struct PlacedCopy {
    double scale = 1.0;
    Isometry iso;
    int round = 0;
    int level = 0;       // lattice level, pitch = root pitch / 2^level
    Box cell;            // lattice square holding the copy
    Shape domain;        // f(k Omega)
};

struct PackingLayout {
    std::vector<PlacedCopy> copies;
    Polygon target;
    double target_area = 0.0;
    double source_area = 0.0;
    double half_width = 0.0;    // M: the source fits a square of side 2M
    double density = 0.0;       // |Omega| / (2M)^2
    int rounds_required = 0;    // smallest j with (1 - density/2)^j < epsilon
    int rounds = 0;             // rounds actually run
    std::vector<double> leftover_after_round;  // uncovered area after rounds 0..rounds
    double uncovered_fraction = 1.0;
    double epsilon = 0.0;
};

struct PackOptions {
    int max_rounds = 64;
    int max_level = 24;
    std::size_t max_copies = 1'000'000;
};

/// Smallest j >= 0 with (1 - density/2)^j < epsilon.
int rounds_for(double density, double epsilon);

/// Packs scaled, translated copies of `source` into `target` on a dyadic lattice until the
/// uncovered fraction drops below epsilon. Throws resource_limit when the budgets run out.
PackingLayout pack_copies(const Shape& source, const Polygon& target, double epsilon, const PackOptions& options = {});

/// Surface on the layout target: the transported copies of `u`, and -c on the uncovered
/// remainder where c is the largest copy depth.
Surface transfer(const Surface& u, const PackingLayout& layout);

}  // namespace newton_sic

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "newton_sic/geometry.hpp"

namespace newton_sic {

/// Triangle ABC with apex B, base AC, and a separating segment MN parallel to AC
/// (M on AB, N on BC). MBN is the small triangle, AMNC the trapezoid.
struct BigTriangle {
    Point2 a, b, c;
    Point2 m, n;

    /// max(|AB|, |BC|)
    double r0() const;
    /// dist(B, segment MN) / r0
    double kappa() const;
    /// Distance from B to the line MN.
    double small_height() const;
    /// Distance between the lines MN and AC.
    double trap_height() const;
    double separating_length() const { return distance(m, n); }

    Polygon small_triangle() const { return ensure_ccw({m, b, n}); }
    Polygon trapezoid() const { return ensure_ccw({a, m, n, c}); }
    Polygon outline() const { return ensure_ccw({a, b, c}); }

    /// Throws degenerate_geometry when any invariant fails (finite points, MN parallel to AC,
    /// M and N strictly inside the lateral sides).
    void validate() const;
};

/// Auxiliary points of one doubling step.
struct DoublingTrace {
    Point2 m_ext;  // M' = B + delta (B - M)
    Point2 n_ext;  // N' = B + delta (B - N)
    Point2 mid;    // T, midpoint of MN
    Point2 a_new;  // A' = line(N', T) x line(A, C)
    Point2 c_new;  // C' = line(M', T) x line(A, C)
    Point2 r;      // line(N', T) x segment MB
    Point2 s;      // line(M', T) x segment NB
    Point2 p;      // line through B parallel to MN, met by N'T
    Point2 q;      // same line, met by M'T
};

struct DoublingResult {
    BigTriangle left;   // A M' C' with separating segment M T
    BigTriangle right;  // A' N' C with separating segment T N
    DoublingTrace trace;
};

/// Separating segment on the x-axis centred at the origin, apex above it.
BigTriangle make_initial_triangle(double base_length, double trap_height, double small_height);

DoublingResult delta_double(const BigTriangle& tri, double delta);

/// delta_m for step m >= 1.
using DeltaRule = std::function<double(int)>;

/// delta_m = 1/m, which gives small heights h_m = (m + 1) h_0.
DeltaRule harmonic_delta_rule();

struct FamilyOptions {
    int generation = 0;
    double base_length = 1.0;
    std::optional<double> trap_height;  // nullopt: sqrt(n)
    double initial_small_height = 1.0;
    DeltaRule delta_rule;                 // empty: harmonic
    int max_generation = 16;              // memory budget, 2^n triangles
    bool measure_each_step = true;        // record S_m for every m
    int exact_union_max_generation = 12;  // above this the union is rasterized
    double raster_resolution = 0.0;       // 0: chosen from the family size
};

struct DoublingFamily {
    int generation = 0;
    std::vector<BigTriangle> triangles;  // ordered left to right along MN
    double base_length = 0.0;
    double trap_height = 0.0;
    std::vector<double> small_heights;   // h_0 .. h_n
    std::vector<double> deltas;          // delta_1 .. delta_n (index m-1)
    std::vector<double> step_union_areas;  // S_0 .. S_n when measured per step, else only S_n
    double small_union_area = 0.0;         // |small triangles union|
    double small_union_error = 0.0;
    UnionMethod small_union_method = UnionMethod::exact_sweep;
    double trap_area = 0.0;                // sum of trapezoid areas (disjoint)
    double kappa_min = 0.0;
    double max_rb_ratio_error = 0.0;       // worst relative deviation of |RB| from delta/(1+2 delta)|MB|
    double max_partition_error = 0.0;      // worst endpoint mismatch when splitting MN

    std::vector<Polygon> small_triangles() const;
    std::vector<Polygon> trapezoids() const;
};

DoublingFamily build_family(const FamilyOptions& options);

/// Union area of the small triangles with the method policy of FamilyOptions.
AreaEstimate measure_small_union(const std::vector<BigTriangle>& tris, const FamilyOptions& options);

struct FamilyCheck {
    DisjointReport trapezoids;
    bool full_pairwise = false;
    bool trapezoids_below_small_triangles = false;  // separated by the line through MN
    double partition_error = 0.0;                   // separating segments tile MN
};

/// Full pairwise when n <= full_pairwise_max_generation, otherwise adjacent pairs plus
/// `random_pairs` sampled non-adjacent pairs.
FamilyCheck check_family(const DoublingFamily& family, double overlap_tol,
                         int full_pairwise_max_generation = 10,
                         std::size_t random_pairs = 20000, std::uint64_t seed = 1);

}  // namespace newton_sic

#include "newton_sic/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

#include "newton_sic/errors.hpp"

namespace newton_sic {

Surface baseline_ua() {
    const Polygon square{{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
    MaxOf u;
    u.generators.push_back(LinearParabola{{1.0, 0.0}, 0.0, 0.5, 1.0, 1.0});
    u.generators.push_back(LinearParabola{{0.0, 1.0}, 0.0, 0.5, 1.0, 1.0});
    return Surface(square, {{std::move(u), WholeDomain{}}}, 3.0 / 8.0, SurfaceInfo{"ua", 0, 0.0, 0.0, 0});
}

Surface baseline_ub() {
    Reuleaux r;
    const double rho = 1.0 / std::sqrt(3.0);
    MaxOf u;
    for (int i = 0; i < 3; ++i) {
        const double t = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * i / 3.0;
        r.vertices[static_cast<std::size_t>(i)] = {rho * std::cos(t), rho * std::sin(t)};
        u.generators.push_back(RadialParabola{r.vertices[static_cast<std::size_t>(i)], 1.0, 1.0});
    }
    r.radius = 1.0;
    return Surface(r, {{std::move(u), WholeDomain{}}}, 1.0 / 3.0, SurfaceInfo{"ub", 0, 0.0, 0.0, 0});
}

Besicovitch besicovitch(int n, double a, std::optional<double> d, std::optional<double> c, const FamilyOptions& base) {
    if (n < 1) throw Error(ErrorCode::invalid_parameter, "besicovitch needs n >= 1");
    FamilyOptions opt = base;
    opt.generation = n;
    opt.base_length = a;
    opt.trap_height = d;
    DoublingFamily family = build_family(opt);
    Surface s = assemble(family, c);
    return {std::move(family), std::move(s)};
}

Surface flat_fixture(double level) {
    const Polygon square{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
    return Surface(square, {{Flat{level}, WholeDomain{}}}, -level, SurfaceInfo{"flat", 0, 0.0, 0.0, 0});
}

Surface cone_fixture(double slope) {
    return Surface(Disk{{0.0, 0.0}, 1.0}, {{Cone{{0.0, 0.0}, slope, 1.0}, WholeDomain{}}}, slope,
                   SurfaceInfo{"cone", 0, 0.0, 0.0, 0});
}

Polygon regular_polygon(int sides, double radius, Point2 center) {
    if (sides < 3 || !(radius > 0.0)) throw Error(ErrorCode::invalid_parameter, "regular polygon needs >= 3 sides");
    Polygon p;
    for (int i = 0; i < sides; ++i) {
        const double t = 2.0 * std::numbers::pi * i / sides;
        p.push_back({center.x + radius * std::cos(t), center.y + radius * std::sin(t)});
    }
    return p;
}

int rounds_for(double density, double epsilon) {
    if (!(density > 0.0 && density <= 1.0)) throw Error(ErrorCode::invalid_parameter, "density must be in (0, 1]");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::invalid_parameter, "epsilon must be in (0, 1)");
    int j = 0;
    double q = 1.0;
    while (!(q < epsilon)) {
        q *= 1.0 - 0.5 * density;
        ++j;
    }
    return j;
}

namespace {

std::uint64_t cell_key(int level, std::uint64_t i, std::uint64_t j) {
    return (static_cast<std::uint64_t>(level) << 56) | (i << 28) | j;
}

class Packer {
public:
    Packer(const Shape& source, const Polygon& target, const PackOptions& opt, const std::vector<PlacedCopy>& copies)
        : source_(source), opt_(opt), copies_(copies) {
        target_ = ensure_ccw(target);
        const Box tb = bounding_box(target_);
        root_ = {tb.min_x, tb.min_y, tb.min_x + std::max(tb.width(), tb.height()),
                 tb.min_y + std::max(tb.width(), tb.height())};
        const Box sb = shape_bbox(source);
        half_width_ = 0.5 * std::max(sb.width(), sb.height());
        source_center_ = {0.5 * (sb.min_x + sb.max_x), 0.5 * (sb.min_y + sb.max_y)};
        pieces_ = shape_convex_pieces(source);
        convex_ = std::holds_alternative<Disk>(source) || std::holds_alternative<Reuleaux>(source) ||
                  (std::holds_alternative<Polygon>(source) && pieces_.size() == 1);
    }

    double half_width() const { return half_width_; }

    /// Free lattice cells at `level`, optionally collected.
    std::uint64_t count_free(int level, std::vector<std::pair<std::uint64_t, std::uint64_t>>* out) {
        return visit(0, 0, 0, level, out);
    }

    void place(int level, std::uint64_t i, std::uint64_t j, int round, std::vector<PlacedCopy>& copies) {
        const Box b = cell(level, i, j);
        PlacedCopy c;
        c.scale = b.width() / (2.0 * half_width_);
        const Point2 centre{0.5 * (b.min_x + b.max_x), 0.5 * (b.min_y + b.max_y)};
        c.iso.translation = centre - source_center_ * c.scale;
        c.round = round;
        c.level = level;
        c.cell = b;
        c.domain = shape_transform(source_, Similarity{c.scale, c.iso});
        placed_[cell_key(level, i, j)] = copies.size();
        for (int l = level - 1; l >= 0; --l) {
            const int shift = level - l;
            if (!occupied_.insert(cell_key(l, i >> shift, j >> shift)).second) break;
        }
        copies.push_back(std::move(c));
    }

    const Polygon& target() const { return target_; }
    double root_pitch() const { return root_.width(); }

private:
    Box cell(int level, std::uint64_t i, std::uint64_t j) const {
        const double p = root_.width() / std::ldexp(1.0, level);
        return {root_.min_x + p * static_cast<double>(i), root_.min_y + p * static_cast<double>(j),
                root_.min_x + p * static_cast<double>(i + 1), root_.min_y + p * static_cast<double>(j + 1)};
    }

    // -1 disjoint, 0 partial, +1 cell inside the copy.
    int copy_relation(const PlacedCopy& c, const Box& b) const {
        const double shrink = 1e-12 * b.width();
        const Box inner{b.min_x + shrink, b.min_y + shrink, b.max_x - shrink, b.max_y - shrink};
        bool overlap = false;
        if (pieces_.empty()) {
            overlap = shape_box_relation(c.domain, inner) >= 0;
        } else {
            for (const auto& piece : pieces_) {
                Polygon moved;
                moved.reserve(piece.size());
                for (const auto& p : piece) moved.push_back(c.iso.apply(p * c.scale));
                if (convex_overlaps_box(moved, inner)) {
                    overlap = true;
                    break;
                }
            }
        }
        if (!overlap) return -1;
        if (convex_) {
            const Point2 corners[4] = {{b.min_x, b.min_y}, {b.max_x, b.min_y}, {b.max_x, b.max_y}, {b.min_x, b.max_y}};
            if (std::all_of(std::begin(corners), std::end(corners),
                            [&](const Point2& q) { return shape_contains(c.domain, q, 0.0); }))
                return 1;
        }
        return 0;
    }

    std::uint64_t visit(int level, std::uint64_t i, std::uint64_t j, int target_level,
                        std::vector<std::pair<std::uint64_t, std::uint64_t>>* out) {
        const Box b = cell(level, i, j);
        const double inside = polygon_area(clip_convex(target_, box_polygon(b)));
        if (inside <= 0.0) return 0;
        bool blocked = false;
        for (int l = 0; l <= level; ++l) {
            const int shift = level - l;
            auto it = placed_.find(cell_key(l, i >> shift, j >> shift));
            if (it == placed_.end()) continue;
            const int rel = copy_relation(copies_[it->second], b);
            if (rel > 0) return 0;
            if (rel == 0) blocked = true;
        }
        if (!blocked && !occupied_.count(cell_key(level, i, j)) && inside >= b.area() * (1.0 - 1e-12)) {
            const int shift = target_level - level;
            if (out) {
                const std::uint64_t side = std::uint64_t{1} << shift;
                if (out->size() + side * side > opt_.max_copies)
                    throw Error(ErrorCode::resource_limit, "packing needs more copies than allowed");
                for (std::uint64_t a = 0; a < side; ++a)
                    for (std::uint64_t c = 0; c < side; ++c) out->emplace_back((i << shift) + a, (j << shift) + c);
            }
            return std::uint64_t{1} << (2 * shift);
        }
        if (level == target_level) return 0;
        std::uint64_t n = 0;
        for (std::uint64_t a = 0; a < 2; ++a)
            for (std::uint64_t c = 0; c < 2; ++c) n += visit(level + 1, 2 * i + a, 2 * j + c, target_level, out);
        return n;
    }

    const Shape& source_;
    PackOptions opt_;
    Polygon target_;
    Box root_;
    double half_width_ = 0.0;
    Point2 source_center_;
    std::vector<Polygon> pieces_;
    bool convex_ = false;
    const std::vector<PlacedCopy>& copies_;
    std::unordered_map<std::uint64_t, std::size_t> placed_;
    std::unordered_set<std::uint64_t> occupied_;  // cells holding a finer copy
};

}  // namespace

PackingLayout pack_copies(const Shape& source, const Polygon& target, double epsilon, const PackOptions& opt) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::invalid_parameter, "epsilon must be in (0, 1)");
    if (target.size() < 3 || !is_simple(target))
        throw Error(ErrorCode::invalid_geometry, "packing target must be a simple polygon");
    PackingLayout layout;
    layout.epsilon = epsilon;
    Packer packer(source, target, opt, layout.copies);
    layout.target = packer.target();
    layout.target_area = polygon_area(layout.target);
    layout.source_area = shape_area(source);
    layout.half_width = packer.half_width();
    if (!(layout.source_area > 0.0 && layout.half_width > 0.0))
        throw Error(ErrorCode::invalid_geometry, "source domain has no area");
    layout.density = layout.source_area / (4.0 * layout.half_width * layout.half_width);
    layout.rounds_required = rounds_for(layout.density, epsilon);

    double leftover = layout.target_area;
    layout.leftover_after_round.push_back(leftover);
    int level = 0;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> cells;
    for (int round = 1; leftover >= epsilon * layout.target_area; ++round) {
        if (round > opt.max_rounds)
            throw Error(ErrorCode::resource_limit,
                        "packing round budget exhausted at uncovered fraction " + std::to_string(leftover / layout.target_area));
        for (;; ++level) {
            if (level > opt.max_level)
                throw Error(ErrorCode::resource_limit, "packing lattice level budget exhausted at uncovered fraction " +
                                                           std::to_string(leftover / layout.target_area));
            const double pitch = packer.root_pitch() / std::ldexp(1.0, level);
            const auto free = packer.count_free(level, nullptr);
            if (static_cast<double>(free) * pitch * pitch > 0.5 * leftover) break;
        }
        cells.clear();
        packer.count_free(level, &cells);
        if (layout.copies.size() + cells.size() > opt.max_copies)
            throw Error(ErrorCode::resource_limit, "packing needs more copies than allowed");
        for (const auto& [i, j] : cells) {
            packer.place(level, i, j, round, layout.copies);
            const double k = layout.copies.back().scale;
            leftover -= k * k * layout.source_area;
        }
        leftover = std::max(0.0, leftover);
        layout.leftover_after_round.push_back(leftover);
        layout.rounds = round;
    }
    layout.uncovered_fraction = leftover / layout.target_area;
    return layout;
}

Surface transfer(const Surface& u, const PackingLayout& layout) {
    if (layout.copies.empty()) throw Error(ErrorCode::invalid_parameter, "layout has no copies");
    std::vector<Region> regions;
    double depth = 0.0;
    for (const auto& copy : layout.copies) {
        const Surface sc = scale_copy(u, copy.scale, copy.iso);
        depth = std::max(depth, sc.depth());
        for (const auto& r : sc.regions()) {
            if (std::holds_alternative<Remainder>(r.support))
                throw Error(ErrorCode::invalid_parameter, "cannot transfer a surface with a remainder region");
            Support sup = r.support;
            if (std::holds_alternative<WholeDomain>(r.support))
                sup = std::visit([](const auto& s) -> Support { return s; }, sc.domain());
            regions.push_back({r.formula, std::move(sup)});
        }
    }
    regions.push_back({Flat{-depth}, Remainder{}});
    SurfaceInfo info = u.info();
    info.construction = "transfer:" + u.info().construction;
    return Surface(layout.target, std::move(regions), depth, std::move(info));
}

}  // namespace newton_sic

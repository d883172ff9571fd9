#include "newton_sic/export.hpp"

#include <cmath>
#include <cstdio>
#include <string_view>

#include "newton_sic/errors.hpp"

namespace newton_sic {

const char* to_string(ExportFormat f) {
    switch (f) {
        case ExportFormat::obj: return "obj";
        case ExportFormat::svg: return "svg";
        case ExportFormat::csv: return "csv";
    }
    return "unknown";
}

ExportFormat parse_export_format(const std::string& name) {
    if (name == "obj") return ExportFormat::obj;
    if (name == "svg") return ExportFormat::svg;
    if (name == "csv") return ExportFormat::csv;
    throw Error(ErrorCode::invalid_parameter, "unknown export format '" + name + "'");
}

namespace {

constexpr std::size_t kMaxGridPoints = 64'000'000;

struct Grid {
    double x0, y0, h;
    std::size_t nx, ny;
};

Grid make_grid(const Surface& s, double h, bool centred) {
    if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::invalid_parameter, "resolution must be positive");
    const Box b = s.bbox();
    const auto cells = [h](double w) { return static_cast<std::size_t>(std::max(1.0, std::ceil(w / h - 1e-9))); };
    Grid g{b.min_x, b.min_y, h, cells(b.width()), cells(b.height())};
    if (!centred) {
        ++g.nx;
        ++g.ny;
    } else {
        g.x0 += 0.5 * h;
        g.y0 += 0.5 * h;
    }
    if (static_cast<double>(g.nx) * static_cast<double>(g.ny) > static_cast<double>(kMaxGridPoints))
        throw Error(ErrorCode::resource_limit, "export grid too fine for the domain");
    return g;
}

void append(std::string& out, const char* fmt, double a, double b, double c) {
    char buf[96];
    const int n = std::snprintf(buf, sizeof buf, fmt, a, b, c);
    out.append(buf, static_cast<std::size_t>(n));
}

double mirror(const Box& b, double y) { return b.min_y + b.max_y - y; }

void path_polygon(std::string& d, const Polygon& p, const Box& b) {
    char buf[80];
    for (std::size_t i = 0; i < p.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%c%.9g %.9g ", i == 0 ? 'M' : 'L', p[i].x, mirror(b, p[i].y));
        d += buf;
    }
    d += "Z ";
}

std::string path_data(const Shape& shape, const Box& b) {
    std::string d;
    if (const auto* m = std::get_if<MultiPolygon>(&shape)) {
        for (const auto& part : m->parts) path_polygon(d, part, b);
    } else if (const auto* p = std::get_if<Polygon>(&shape)) {
        path_polygon(d, *p, b);
    } else {
        path_polygon(d, shape_outline(shape, 64), b);
    }
    if (!d.empty()) d.pop_back();
    return d;
}

const char* region_class(const Region& r) {
    if (std::holds_alternative<RadialParabola>(r.formula) && std::holds_alternative<Polygon>(r.support))
        return "trapezoid";
    if (std::holds_alternative<Flat>(r.formula)) return "flat";
    return formula_kind(r.formula);
}

}  // namespace

std::string export_obj(const Surface& s, double resolution, MeshStats* stats) {
    const Grid g = make_grid(s, resolution, false);
    std::vector<long long> id(g.nx * g.ny, 0);
    std::string out = "# height-field mesh\n";
    MeshStats st;
    for (std::size_t j = 0; j < g.ny; ++j) {
        for (std::size_t i = 0; i < g.nx; ++i) {
            const Point2 p{g.x0 + static_cast<double>(i) * g.h, g.y0 + static_cast<double>(j) * g.h};
            auto z = s.formula_value(p);
            if (!z) z = s.value_at(p);
            if (!z) continue;
            id[j * g.nx + i] = static_cast<long long>(++st.vertices);
            append(out, "v %.17g %.17g %.17g\n", p.x, p.y, *z);
        }
    }
    char buf[96];
    auto face = [&](long long a, long long b, long long c) {
        if (a == 0 || b == 0 || c == 0) return;
        std::snprintf(buf, sizeof buf, "f %lld %lld %lld\n", a, b, c);
        out += buf;
        ++st.faces;
    };
    for (std::size_t j = 0; j + 1 < g.ny; ++j) {
        for (std::size_t i = 0; i + 1 < g.nx; ++i) {
            const long long a = id[j * g.nx + i], b = id[j * g.nx + i + 1];
            const long long c = id[(j + 1) * g.nx + i + 1], d = id[(j + 1) * g.nx + i];
            face(a, b, c);
            face(a, c, d);
        }
    }
    if (stats) *stats = st;
    return out;
}

std::string export_svg(const Surface& s) {
    const Box b = s.bbox();
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"%.9g %.9g %.9g %.9g\">\n", b.min_x, b.min_y,
                  b.width(), b.height());
    std::string out = buf;
    const double stroke = 1e-3 * std::max(b.width(), b.height());
    const std::string domain_path = path_data(s.domain(), b);
    for (std::size_t i = 0; i < s.regions().size(); ++i) {
        const Region& r = s.regions()[i];
        const auto shape = s.support_shape(i);
        const std::string d = shape ? path_data(*shape, b) : domain_path;
        const char* cls = region_class(r);
        const char* fill = std::string_view(cls) == "trapezoid" ? "#9ecae1"
                           : std::string_view(cls) == "flat"    ? "#fdae6b"
                                                                : "#c7e9c0";
        std::snprintf(buf, sizeof buf, "<path class=\"%s\" data-region=\"%zu\" fill=\"%s\" stroke=\"#333\" stroke-width=\"%.3g\" d=\"",
                      cls, i, fill, stroke);
        out += buf;
        out += d;
        out += "\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

std::string export_csv(const Surface& s, double resolution) {
    const Grid g = make_grid(s, resolution, true);
    std::string out = "x1,x2,u\n";
    for (std::size_t j = 0; j < g.ny; ++j) {
        for (std::size_t i = 0; i < g.nx; ++i) {
            const Point2 p{g.x0 + static_cast<double>(i) * g.h, g.y0 + static_cast<double>(j) * g.h};
            if (!s.contains(p, 0.0)) continue;
            append(out, "%.17g,%.17g,%.17g\n", p.x, p.y, *s.value_at(p));
        }
    }
    return out;
}

std::string export_surface(const Surface& s, ExportFormat format, double resolution) {
    switch (format) {
        case ExportFormat::obj: return export_obj(s, resolution);
        case ExportFormat::svg: return export_svg(s);
        case ExportFormat::csv: return export_csv(s, resolution);
    }
    throw Error(ErrorCode::invalid_parameter, "unknown export format");
}

}  // namespace newton_sic

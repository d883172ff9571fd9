#include "newton_sic/document.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "newton_sic/errors.hpp"

namespace newton_sic {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string format_number(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

void dump(const json& j, int indent, int depth, std::string& out) {
    const std::string pad = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
    const std::string close = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
    const char* sep = indent > 0 ? ": " : ":";
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                out += pad;
                out += json(it.key()).dump();
                out += sep;
                dump(it.value(), indent, depth + 1, out);
            }
            out += close;
            out += '}';
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // Short numeric arrays (points, boxes) stay on one line.
            const bool inline_array = j.size() <= 4 && std::all_of(j.begin(), j.end(), [](const json& e) {
                                          return e.is_number();
                                      });
            out += '[';
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += inline_array && indent > 0 ? ", " : ",";
                first = false;
                if (!inline_array) out += pad;
                dump(e, indent, depth + 1, out);
            }
            if (!inline_array) out += close;
            out += ']';
            return;
        }
        case json::value_t::number_float: out += format_number(j.get<double>()); return;
        default: out += j.dump(); return;
    }
}

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::parse_error, what); }

const json& field(const json& j, const char* key) {
    if (!j.is_object()) bad(std::string("expected an object holding '") + key + "'");
    const auto it = j.find(key);
    if (it == j.end()) bad(std::string("missing field '") + key + "'");
    return *it;
}

double number(const json& j, const char* key) {
    const json& v = field(j, key);
    if (!v.is_number()) bad(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

json point(const Point2& p) { return json::array({p.x, p.y}); }

Point2 point_from(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) bad("points are [x, y] arrays");
    return {j[0].get<double>(), j[1].get<double>()};
}

json polygon(const Polygon& p) {
    json a = json::array();
    for (const auto& v : p) a.push_back(point(v));
    return a;
}

Polygon polygon_from(const json& j) {
    if (!j.is_array()) bad("polygon vertices must be an array");
    Polygon p;
    for (const auto& v : j) p.push_back(point_from(v));
    return p;
}

json generator_to_json(const Generator& g) {
    return std::visit(overloaded{
                          [](const RadialParabola& r) {
                              return json{{"kind", "radial-parabola"}, {"focus", point(r.focus)}, {"r0", r.r0},
                                          {"focal", r.focal}};
                          },
                          [](const LinearParabola& l) {
                              return json{{"kind", "linear-parabola"}, {"normal", point(l.normal)}, {"axis", l.axis},
                                          {"offset", l.offset}, {"r0", l.r0}, {"focal", l.focal}};
                          },
                      },
                      g);
}

Generator generator_from_json(const json& j) {
    const std::string kind = field(j, "kind").get<std::string>();
    if (kind == "radial-parabola") return RadialParabola{point_from(field(j, "focus")), number(j, "r0"), number(j, "focal")};
    if (kind == "linear-parabola")
        return LinearParabola{point_from(field(j, "normal")), number(j, "axis"), number(j, "offset"), number(j, "r0"),
                              number(j, "focal")};
    bad("unknown generator kind '" + kind + "'");
}

json formula_to_json(const Formula& f) {
    return std::visit(overloaded{
                          [](const RadialParabola& r) { return generator_to_json(r); },
                          [](const LinearParabola& l) { return generator_to_json(l); },
                          [](const Flat& fl) { return json{{"kind", "flat"}, {"level", fl.level}}; },
                          [](const Cone& c) {
                              return json{{"kind", "cone"}, {"apex", point(c.apex)}, {"slope", c.slope}, {"radius", c.radius}};
                          },
                          [](const MaxOf& m) {
                              json g = json::array();
                              for (const auto& gen : m.generators) g.push_back(generator_to_json(gen));
                              return json{{"kind", "max-of"}, {"generators", g}};
                          },
                      },
                      f);
}

Formula formula_from_json(const json& j) {
    const std::string kind = field(j, "kind").get<std::string>();
    if (kind == "radial-parabola") return std::get<RadialParabola>(generator_from_json(j));
    if (kind == "linear-parabola") return std::get<LinearParabola>(generator_from_json(j));
    if (kind == "flat") return Flat{number(j, "level")};
    if (kind == "cone") return Cone{point_from(field(j, "apex")), number(j, "slope"), number(j, "radius")};
    if (kind == "max-of") {
        MaxOf m;
        const json& g = field(j, "generators");
        if (!g.is_array()) bad("max-of generators must be an array");
        for (const auto& e : g) m.generators.push_back(generator_from_json(e));
        return m;
    }
    bad("unknown region kind '" + kind + "'");
}

json support_to_json(const Support& s) {
    return std::visit(overloaded{
                          [](const WholeDomain&) { return json{{"type", "domain"}}; },
                          [](const Remainder&) { return json{{"type", "remainder"}}; },
                          [](const auto& shape) { return shape_to_json(Shape(shape)); },
                      },
                      s);
}

Support support_from_json(const json& j) {
    const std::string type = field(j, "type").get<std::string>();
    if (type == "domain") return WholeDomain{};
    if (type == "remainder") return Remainder{};
    return std::visit([](auto&& s) -> Support { return s; }, shape_from_json(j));
}

}  // namespace

std::string dump_json(const json& j, int indent) {
    std::string out;
    dump(j, indent, 0, out);
    out += '\n';
    return out;
}

json shape_to_json(const Shape& s) {
    return std::visit(overloaded{
                          [](const Polygon& p) { return json{{"type", "polygon"}, {"vertices", polygon(p)}}; },
                          [](const Disk& d) { return json{{"type", "disk"}, {"center", point(d.center)}, {"radius", d.radius}}; },
                          [](const Reuleaux& r) {
                              json v = json::array();
                              for (const auto& p : r.vertices) v.push_back(point(p));
                              return json{{"type", "reuleaux"}, {"vertices", v}, {"radius", r.radius}};
                          },
                          [](const MultiPolygon& m) {
                              json parts = json::array();
                              for (const auto& p : m.parts) parts.push_back(polygon(p));
                              return json{{"type", "multipolygon"}, {"parts", parts}, {"area", m.area}};
                          },
                      },
                      s);
}

Shape shape_from_json(const json& j) {
    const std::string type = field(j, "type").get<std::string>();
    if (type == "polygon") return polygon_from(field(j, "vertices"));
    if (type == "disk") return Disk{point_from(field(j, "center")), number(j, "radius")};
    if (type == "reuleaux") {
        const json& v = field(j, "vertices");
        if (!v.is_array() || v.size() != 3) bad("reuleaux needs three vertices");
        return Reuleaux{{point_from(v[0]), point_from(v[1]), point_from(v[2])}, number(j, "radius")};
    }
    if (type == "multipolygon") {
        MultiPolygon m;
        const json& parts = field(j, "parts");
        if (!parts.is_array()) bad("multipolygon parts must be an array");
        for (const auto& p : parts) m.parts.push_back(polygon_from(p));
        m.area = number(j, "area");
        return m;
    }
    bad("unknown shape type '" + type + "'");
}

json surface_to_json(const Surface& s) {
    json regions = json::array();
    for (const auto& r : s.regions()) {
        json e = formula_to_json(r.formula);
        e["support"] = support_to_json(r.support);
        regions.push_back(std::move(e));
    }
    const auto& info = s.info();
    return json{
        {"schema", "newton-sic/surface"},
        {"version", kSchemaVersion},
        {"domain", shape_to_json(s.domain())},
        {"regions", regions},
        {"metadata",
         {{"construction", info.construction}, {"n", info.n}, {"a", info.a}, {"d", info.d}, {"c", s.depth()},
          {"seed", info.seed}}},
    };
}

Surface surface_from_json(const json& j) {
    try {
        if (field(j, "schema").get<std::string>() != "newton-sic/surface") bad("not a surface document");
        if (field(j, "version").get<int>() != kSchemaVersion) bad("unsupported schema version");
        Shape domain = shape_from_json(field(j, "domain"));
        std::vector<Region> regions;
        const json& rs = field(j, "regions");
        if (!rs.is_array()) bad("regions must be an array");
        for (const auto& r : rs) regions.push_back({formula_from_json(r), support_from_json(field(r, "support"))});
        const json& meta = field(j, "metadata");
        SurfaceInfo info;
        info.construction = field(meta, "construction").get<std::string>();
        info.n = field(meta, "n").get<int>();
        info.a = number(meta, "a");
        info.d = number(meta, "d");
        info.seed = field(meta, "seed").get<std::uint64_t>();
        return Surface(std::move(domain), std::move(regions), number(meta, "c"), std::move(info));
    } catch (const json::exception& e) {
        bad(e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::parse_error) throw;
        bad(e.what());
    }
}

json layout_to_json(const PackingLayout& layout) {
    json copies = json::array();
    for (const auto& c : layout.copies)
        copies.push_back({{"scale", c.scale},
                          {"angle", c.iso.angle},
                          {"reflect", c.iso.reflect},
                          {"translation", point(c.iso.translation)},
                          {"round", c.round},
                          {"level", c.level},
                          {"cell", json::array({c.cell.min_x, c.cell.min_y, c.cell.max_x, c.cell.max_y})}});
    return json{
        {"schema", "newton-sic/packing"},
        {"version", kSchemaVersion},
        {"target", shape_to_json(layout.target)},
        {"epsilon", layout.epsilon},
        {"target_area", layout.target_area},
        {"source_area", layout.source_area},
        {"half_width", layout.half_width},
        {"density", layout.density},
        {"rounds_required", layout.rounds_required},
        {"rounds", layout.rounds},
        {"leftover_after_round", layout.leftover_after_round},
        {"uncovered_fraction", layout.uncovered_fraction},
        {"copies", copies},
    };
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorCode::io_error, "write failed for '" + path + "'");
}

namespace {

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        bad(e.what());
    }
}

}  // namespace

Surface read_surface(const std::string& path) { return surface_from_json(parse(read_text(path))); }

void write_surface(const std::string& path, const Surface& s) { write_text(path, dump_json(surface_to_json(s))); }

Polygon read_polygon(const std::string& path) {
    const json j = parse(read_text(path));
    try {
        const json& shape = j.contains("schema") ? field(j, "domain") : j;
        const Shape s = shape_from_json(shape);
        if (const auto* p = std::get_if<Polygon>(&s)) return *p;
        bad("expected a polygon");
    } catch (const json::exception& e) {
        bad(e.what());
    }
}

}  // namespace newton_sic

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "newton_sic/constructions.hpp"
#include "newton_sic/document.hpp"
#include "newton_sic/export.hpp"
#include "newton_sic/resistance.hpp"

using namespace newton_sic;
using nlohmann::json;

namespace {

std::string tmp_path(const char* name) { return std::string("doc_test_") + name; }

void check_same(const Surface& a, const Surface& b) {
    CHECK(dump_json(surface_to_json(a)) == dump_json(surface_to_json(b)));
    CHECK(a.area() == b.area());
    CHECK(a.depth() == b.depth());
    for (const Point2 p : {Point2{0.1, 0.05}, Point2{-0.2, 0.3}, Point2{0.01, 0.4}}) CHECK(a.value_at(p) == b.value_at(p));
}

}  // namespace

TEST_CASE("numbers print with 17 significant digits") {
    const json j = {{"x", 0.1}, {"third", 1.0 / 3.0}, {"n", 3}};
    const std::string s = dump_json(j, 0);
    CHECK(s.find("0.10000000000000001") != std::string::npos);
    CHECK(s.find("0.33333333333333331") != std::string::npos);
    CHECK(s.find("\"n\":3") != std::string::npos);
    CHECK(json::parse(s)["third"].get<double>() == 1.0 / 3.0);
}

TEST_CASE("surface documents round-trip losslessly") {
    std::vector<Surface> catalog{baseline_ua(), baseline_ub(), besicovitch(3).surface, flat_fixture(), cone_fixture()};
    Isometry iso;
    iso.angle = 0.3;
    iso.reflect = true;
    iso.translation = {0.1, 0.7};
    catalog.push_back(scale_copy(baseline_ua(), 0.37, iso));
    for (const auto& s : catalog) {
        const std::string text = dump_json(surface_to_json(s));
        const Surface back = surface_from_json(json::parse(text));
        check_same(s, back);
        CHECK(dump_json(surface_to_json(back)) == text);
    }
    const std::string path = tmp_path("ub.json");
    write_surface(path, baseline_ub());
    check_same(read_surface(path), baseline_ub());
    std::remove(path.c_str());
}

TEST_CASE("document layout") {
    const json j = surface_to_json(baseline_ub());
    CHECK(j["schema"] == "newton-sic/surface");
    CHECK(j["version"] == kSchemaVersion);
    CHECK(j["domain"]["type"] == "reuleaux");
    CHECK(j["domain"]["vertices"].size() == 3);
    CHECK(j["domain"]["radius"] == 1.0);
    CHECK(j["metadata"]["construction"] == "ub");
    const json b = surface_to_json(besicovitch(6).surface);
    CHECK(b["regions"].size() == 65);
    CHECK(b["metadata"]["n"] == 6);
}

TEST_CASE("malformed documents are rejected") {
    json j = surface_to_json(baseline_ua());
    json unknown = j;
    unknown["regions"][0]["kind"] = "hyperboloid";
    CHECK_THROWS_AS(surface_from_json(unknown), Error);
    json missing = j;
    missing.erase("domain");
    CHECK_THROWS_AS(surface_from_json(missing), Error);
    json version = j;
    version["version"] = 99;
    CHECK_THROWS_AS(surface_from_json(version), Error);
    json bad_point = j;
    bad_point["domain"]["vertices"][0] = json::array({1.0});
    CHECK_THROWS_AS(surface_from_json(bad_point), Error);
    try {
        surface_from_json(unknown);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::parse_error);
    }
}

TEST_CASE("file errors") {
    try {
        read_surface("does/not/exist.json");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::io_error);
    }
    try {
        write_text("/nonexistent-dir/x.json", "{}");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::io_error);
    }
}

TEST_CASE("polygon files") {
    const std::string path = tmp_path("poly.json");
    write_text(path, dump_json(shape_to_json(regular_polygon(6))));
    CHECK(read_polygon(path).size() == 6);
    write_surface(path, baseline_ua());
    CHECK(read_polygon(path).size() == 4);
    write_surface(path, baseline_ub());
    CHECK_THROWS_AS(read_polygon(path), Error);
    std::remove(path.c_str());
}

TEST_CASE("layout document") {
    const Surface u = baseline_ua();
    const PackingLayout l = pack_copies(u.domain(), regular_polygon(16), 0.3);
    const json j = layout_to_json(l);
    CHECK(j["copies"].size() == l.copies.size());
    CHECK(j["uncovered_fraction"].get<double>() == l.uncovered_fraction);
}

namespace {

struct Obj {
    std::vector<std::array<double, 3>> v;
    std::vector<std::array<long, 3>> f;
};

Obj parse_obj(const std::string& text) {
    Obj o;
    std::istringstream in(text);
    std::string tag;
    while (in >> tag) {
        if (tag == "v") {
            std::array<double, 3> p{};
            in >> p[0] >> p[1] >> p[2];
            o.v.push_back(p);
        } else if (tag == "f") {
            std::array<long, 3> t{};
            in >> t[0] >> t[1] >> t[2];
            o.f.push_back(t);
        } else {
            std::string rest;
            std::getline(in, rest);
        }
    }
    return o;
}

double ub_oracle(double x, double y) {
    const double s3 = std::sqrt(3.0);
    const double vx[3] = {0.0, -0.5, 0.5}, vy[3] = {1 / s3, -0.5 / s3, -0.5 / s3};
    double r = 0.0;
    for (int i = 0; i < 3; ++i) r = std::max(r, std::hypot(x - vx[i], y - vy[i]));
    return 0.5 * (r * r - 1.0);
}

}  // namespace

TEST_CASE("obj export of u^b") {
    const double res = 0.02;
    MeshStats st;
    const Obj o = parse_obj(export_obj(baseline_ub(), res, &st));
    CHECK(o.v.size() == st.vertices);
    CHECK(o.f.size() == st.faces);
    REQUIRE(o.f.size() > 1000);
    double worst = 0.0;
    for (const auto& p : o.v) worst = std::max(worst, std::abs(p[2] - ub_oracle(p[0], p[1])));
    CHECK(worst < res * res);
    // Boundary edges (used by one face) form closed loops.
    std::map<std::pair<long, long>, int> uses;
    for (const auto& t : o.f) {
        for (int k = 0; k < 3; ++k) {
            CHECK(t[k] >= 1);
            CHECK(t[k] <= static_cast<long>(o.v.size()));
            long a = t[k], b = t[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            ++uses[{a, b}];
        }
    }
    std::map<long, int> degree;
    for (const auto& [e, n] : uses) {
        CHECK(n <= 2);
        if (n == 1) {
            ++degree[e.first];
            ++degree[e.second];
        }
    }
    REQUIRE_FALSE(degree.empty());
    for (const auto& [v, d] : degree) CHECK(d % 2 == 0);
}

TEST_CASE("obj export of the flat fixture is level") {
    const Obj o = parse_obj(export_obj(flat_fixture(-0.25), 0.1));
    REQUIRE_FALSE(o.v.empty());
    for (const auto& p : o.v) CHECK(p[2] == -0.25);
}

TEST_CASE("svg export of generation 3") {
    const Surface s = besicovitch(3).surface;
    const std::string svg = export_svg(s);
    std::size_t paths = 0, pos = 0;
    while ((pos = svg.find("<path", pos)) != std::string::npos) {
        ++paths;
        ++pos;
    }
    CHECK(paths == s.regions().size());
    // The flat region draws the eight small triangles as subpaths.
    const auto flat = svg.find("class=\"flat\"");
    REQUIRE(flat != std::string::npos);
    const auto end = svg.find("/>", flat);
    const std::string d = svg.substr(flat, end - flat);
    CHECK(std::count(d.begin(), d.end(), 'M') == 8);
    CHECK(std::count(d.begin(), d.end(), 'Z') == 8);
    std::size_t traps = 0;
    pos = 0;
    while ((pos = svg.find("class=\"trapezoid\"", pos)) != std::string::npos) {
        ++traps;
        ++pos;
    }
    CHECK(traps == 8);
    const Box b = s.bbox();
    char view[128];
    std::snprintf(view, sizeof view, "viewBox=\"%.9g %.9g %.9g %.9g\"", b.min_x, b.min_y, b.width(), b.height());
    CHECK(svg.find(view) != std::string::npos);
}

TEST_CASE("csv export re-evaluates to the quadrature value") {
    const Surface s = baseline_ua();
    const double h = 0.004;
    const std::string csv = export_csv(s, h);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "x1,x2,u");
    std::map<std::pair<long, long>, double> grid;
    while (std::getline(in, line)) {
        double x, y, u;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &y, &u) == 3);
        grid[{std::lround(x / h - 0.5), std::lround(y / h - 0.5)}] = u;
    }
    double sum = 0.0;
    for (const auto& [k, u] : grid) {
        auto at = [&](long i, long j) -> std::optional<double> {
            const auto it = grid.find({i, j});
            if (it == grid.end()) return std::nullopt;
            return it->second;
        };
        auto slope = [&](std::optional<double> lo, std::optional<double> hi) {
            if (lo && hi) return (*hi - *lo) / (2 * h);
            if (hi) return (*hi - u) / h;
            return (u - *lo) / h;
        };
        const double gx = slope(at(k.first - 1, k.second), at(k.first + 1, k.second));
        const double gy = slope(at(k.first, k.second - 1), at(k.first, k.second + 1));
        sum += 1.0 / (1.0 + gx * gx + gy * gy);
    }
    const double riemann = sum / static_cast<double>(grid.size());
    const auto e = resistance_quadrature(s);
    CHECK(std::abs(riemann - e.value) < e.error + 5 * h);
}

TEST_CASE("export formats") {
    CHECK(parse_export_format("svg") == ExportFormat::svg);
    CHECK_THROWS_AS(parse_export_format("stl"), Error);
    CHECK_THROWS_AS(export_csv(baseline_ua(), 0.0), Error);
}

// newton-sic: construct, evaluate, certify and export admissible surfaces.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "newton_sic/constructions.hpp"
#include "newton_sic/document.hpp"
#include "newton_sic/export.hpp"
#include "newton_sic/resistance.hpp"
#include "newton_sic/sic.hpp"

using namespace newton_sic;
using nlohmann::json;

namespace {

enum Exit { ok = 0, sic_violation = 1, usage = 2, io = 3, budget = 4 };

int exit_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::parse_error:
        case ErrorCode::io_error: return io;
        case ErrorCode::resource_limit: return budget;
        default: return usage;
    }
}

struct Globals {
    unsigned threads = 0;
    std::string record;
};

// Parameters and results of one command, written to --record when given.
struct RunRecord {
    std::string command;
    json parameters = json::object();
    json results = json::object();
};

json estimate_json(const ResistanceEstimate& e) {
    return {{"method", to_string(e.method)}, {"value", e.value},     {"error", e.error},
            {"work", e.work},                {"seed", e.seed},       {"converged", e.converged}};
}

void print_estimate(const char* label, const ResistanceEstimate& e) {
    std::printf("%-26s R = %.6f +/- %.1e  (work %llu)\n", label, e.value, e.error,
                static_cast<unsigned long long>(e.work));
}

// ---- construct -----------------------------------------------------------------------------

struct ConstructArgs {
    std::string name;
    int n = 1;
    double a = 1.0;
    std::optional<double> d, c;
    double level = -0.25;
    double slope = 1.2;
    int sides = 64;
    double radius = 1.0;
    std::string out;
};

int cmd_construct(const ConstructArgs& args, RunRecord& rec) {
    rec.parameters = {{"name", args.name}, {"n", args.n}, {"a", args.a}, {"out", args.out}};
    if (args.name == "polygon") {
        if (args.sides < 3) throw Error(ErrorCode::invalid_parameter, "--sides must be at least 3");
        const Polygon p = regular_polygon(args.sides, args.radius);
        write_text(args.out, dump_json(shape_to_json(p)));
        std::printf("regular %d-gon, radius %g, area %.12f\n", args.sides, args.radius, polygon_area(p));
        rec.results = {{"area", polygon_area(p)}};
        return ok;
    }
    std::optional<Surface> s;
    if (args.name == "ua") {
        s = baseline_ua();
    } else if (args.name == "ub") {
        s = baseline_ub();
    } else if (args.name == "flat") {
        s = flat_fixture(args.level);
    } else if (args.name == "cone") {
        s = cone_fixture(args.slope);
    } else if (args.name == "besicovitch") {
        if (args.n < 1) throw Error(ErrorCode::invalid_parameter, "--n must be at least 1");
        Besicovitch b = besicovitch(args.n, args.a, args.d, args.c);
        const auto& f = b.family;
        std::printf("besicovitch n=%d a=%g d=%.12g\n", f.generation, f.base_length, f.trap_height);
        std::printf("  triangles        %zu\n", f.triangles.size());
        std::printf("  |trap^n|         %.12f\n", f.trap_area);
        std::printf("  |small^n|        %.12f  (+/- %.1e, %s)\n", f.small_union_area, f.small_union_error,
                    f.small_union_method == UnionMethod::rasterization ? "rasterized" : "exact");
        std::printf("  kappa_min        %.12f\n", f.kappa_min);
        std::printf("  bound            %.12f\n", resistance_bound(f.trap_area, f.small_union_area, f.kappa_min));
        rec.results = {{"trap_area", f.trap_area},
                       {"small_area", f.small_union_area},
                       {"kappa_min", f.kappa_min},
                       {"triangles", f.triangles.size()}};
        s = std::move(b.surface);
    } else {
        throw Error(ErrorCode::invalid_parameter, "unknown construction '" + args.name + "'");
    }
    write_surface(args.out, *s);
    std::printf("%s: |Omega| = %.12f, c = %.12g, regions %zu -> %s\n", s->info().construction.c_str(), s->area(),
                s->depth(), s->regions().size(), args.out.c_str());
    rec.results["area"] = s->area();
    rec.results["c"] = s->depth();
    return ok;
}

// ---- eval ----------------------------------------------------------------------------------

struct EvalArgs {
    std::string path;
    std::string method = "quad";
    double target_error = 1e-3;
    std::uint64_t seed = 1;
    std::uint64_t samples = 1'000'000;
    std::uint64_t max_cells = QuadratureOptions{}.max_cells;
    std::string csv;
};

void append_csv_row(const std::string& path, const std::string& surface, const ResistanceEstimate& e) {
    const bool fresh = !std::ifstream(path).good();
    std::ofstream out(path, std::ios::app);
    if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'");
    if (fresh) out << "surface,method,R,error,work,seed\n";
    char buf[160];
    std::snprintf(buf, sizeof buf, ",%s,%.17g,%.17g,%llu,%llu\n", to_string(e.method), e.value, e.error,
                  static_cast<unsigned long long>(e.work), static_cast<unsigned long long>(e.seed));
    out << surface << buf;
}

int cmd_eval(const EvalArgs& args, const Globals& g, RunRecord& rec) {
    rec.parameters = {{"surface", args.path}, {"method", args.method}, {"target_error", args.target_error},
                      {"seed", args.seed},    {"samples", args.samples}};
    const Surface s = read_surface(args.path);
    std::printf("%s: |Omega| = %.12f\n", s.info().construction.c_str(), s.area());
    rec.results["estimates"] = json::array();
    auto report = [&](const ResistanceEstimate& e) {
        print_estimate(to_string(e.method), e);
        rec.results["estimates"].push_back(estimate_json(e));
        if (!args.csv.empty()) append_csv_row(args.csv, args.path, e);
    };
    if (args.method == "quad" || args.method == "both") {
        QuadratureOptions q;
        q.target_error = args.target_error;
        q.max_cells = args.max_cells;
        q.threads = g.threads;
        const auto e = resistance_quadrature(s, q);
        report(e);
        if (!e.converged) return budget;
    }
    if (args.method == "mc" || args.method == "both") {
        MonteCarloOptions m;
        m.samples = args.samples;
        m.seed = args.seed;
        m.threads = g.threads;
        report(resistance_monte_carlo(s, m));
    }
    return ok;
}

// ---- check-sic -----------------------------------------------------------------------------

struct SicArgs {
    std::string path;
    std::size_t samples = 10'000;
    double tolerance = 1e-9;
    std::string mode = "both";
    std::string sampler = "halton";
    std::uint64_t seed = 1;
};

int cmd_check_sic(const SicArgs& args, const Globals& g, RunRecord& rec) {
    rec.parameters = {{"surface", args.path}, {"samples", args.samples}, {"tolerance", args.tolerance},
                      {"mode", args.mode},    {"sampler", args.sampler}, {"seed", args.seed}};
    const Surface s = read_surface(args.path);
    SicOptions o;
    o.samples = args.samples;
    o.tol = args.tolerance;
    o.mode = args.mode == "analytic" ? SicMode::analytic : args.mode == "raytrace" ? SicMode::raytrace : SicMode::both;
    o.sampler = args.sampler == "grid" ? Sampler::grid : args.sampler == "random" ? Sampler::random : Sampler::halton;
    o.seed = args.seed;
    o.threads = g.threads;
    const SicReport r = sic_report(s, o);
    std::printf("%s: SIC %s, mode %s, %s sampler\n", s.info().construction.c_str(), r.certified() ? "certified" : "VIOLATED",
                to_string(r.mode), to_string(o.sampler));
    std::printf("  samples          %zu (regular %zu, skipped %zu)\n", r.samples, r.regular, r.skipped);
    std::printf("  violations       %zu\n", r.violations);
    std::printf("  tangent          %zu\n", r.tangent);
    std::printf("  disagreements    %zu\n", r.disagreements);
    std::printf("  worst residual   %.3e\n", r.worst_residual);
    std::printf("  worst clearance  %.3e\n", r.worst_clearance);
    std::printf("  tolerance        %.1e\n", r.tol);
    if (r.first_violation) {
        const auto& v = *r.first_violation;
        std::printf("  first violation  x = (%.12g, %.12g), residual %.3e, clearance %.3e\n", v.x.x, v.x.y,
                    v.residual_analytic, v.raytrace_clearance);
    }
    rec.results = {{"samples", r.samples},         {"regular", r.regular},
                   {"violations", r.violations},   {"tangent", r.tangent},
                   {"disagreements", r.disagreements}, {"worst_residual", r.worst_residual},
                   {"worst_clearance", r.worst_clearance}};
    return r.certified() ? ok : sic_violation;
}

// ---- converge ------------------------------------------------------------------------------

struct ConvergeArgs {
    double n_min = 1;
    double n_max = 8;
    std::string mode = "measured";
    std::string csv;
    double a = 1.0;
    double target_error = 1e-3;
    int max_n = 16;
    int points = 60;
};

std::vector<double> bound_grid(double lo, double hi, int points) {
    std::vector<double> ns;
    if (hi - lo + 1 <= points) {
        for (double n = lo; n <= hi; n += 1) ns.push_back(n);
        return ns;
    }
    const double ratio = std::pow(hi / lo, 1.0 / (points - 1));
    double prev = 0;
    for (int i = 0; i < points; ++i) {
        const double n = i + 1 == points ? hi : std::round(lo * std::pow(ratio, i));
        if (n > prev) ns.push_back(n);
        prev = n;
    }
    return ns;
}

int cmd_converge(const ConvergeArgs& args, const Globals& g, RunRecord& rec) {
    rec.parameters = {{"n_min", args.n_min}, {"n_max", args.n_max}, {"mode", args.mode}, {"a", args.a},
                      {"target_error", args.target_error}};
    if (!(args.n_min >= 1 && args.n_min <= args.n_max) || args.n_min != std::floor(args.n_min) ||
        args.n_max != std::floor(args.n_max))
        throw Error(ErrorCode::invalid_parameter, "need integers 1 <= n-min <= n-max");
    std::string table;
    int status = ok;
    json rows = json::array();
    char buf[256];
    if (args.mode == "bound") {
        table = "n,trap_area,small_area,kappa_min,bound\n";
        std::fputs(table.c_str(), stdout);
        for (double n : bound_grid(args.n_min, args.n_max, args.points)) {
            const BoundInputs b = BoundInputs::make(n, args.a);
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", n, b.trap_area_lower, b.small_area_upper,
                          b.kappa_lower, b.bound());
            table += buf;
            std::fputs(buf, stdout);
            rows.push_back({{"n", n}, {"bound", b.bound()}});
        }
    } else {
        table = "n,trap_area,small_area,kappa_min,bound,R,R_error\n";
        std::fputs(table.c_str(), stdout);
        for (int n = static_cast<int>(args.n_min); n <= static_cast<int>(std::min(args.n_max, 1e9)); ++n) {
            if (n > args.max_n) {
                std::fprintf(stderr, "newton-sic: n = %d exceeds the geometry budget (max %d)\n", n, args.max_n);
                status = budget;
                break;
            }
            const Besicovitch b = besicovitch(n, args.a);
            const auto& f = b.family;
            QuadratureOptions q;
            q.target_error = args.target_error;
            q.threads = g.threads;
            const auto e = resistance_quadrature(b.surface, q);
            const double bound = resistance_bound(f.trap_area, f.small_union_area, f.kappa_min);
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", n, f.trap_area,
                          f.small_union_area, f.kappa_min, bound, e.value, e.error);
            table += buf;
            std::fputs(buf, stdout);
            std::fflush(stdout);
            rows.push_back({{"n", n}, {"bound", bound}, {"R", e.value}, {"error", e.error}});
            if (!e.converged) {
                status = budget;
                break;
            }
        }
    }
    if (!args.csv.empty()) write_text(args.csv, table);
    rec.results = {{"rows", rows}};
    return status;
}

// ---- export --------------------------------------------------------------------------------

struct ExportArgs {
    std::string path;
    std::string format = "obj";
    double resolution = 0.01;
    std::string out;
};

int cmd_export(const ExportArgs& args, RunRecord& rec) {
    rec.parameters = {{"surface", args.path}, {"format", args.format}, {"resolution", args.resolution},
                      {"out", args.out}};
    const Surface s = read_surface(args.path);
    const ExportFormat f = parse_export_format(args.format);
    const std::string text = export_surface(s, f, args.resolution);
    write_text(args.out, text);
    std::printf("%s: wrote %s (%zu bytes) to %s\n", s.info().construction.c_str(), to_string(f), text.size(),
                args.out.c_str());
    return ok;
}

// ---- pack ----------------------------------------------------------------------------------

struct PackArgs {
    std::string source;
    std::string target;
    double epsilon = 0.05;
    std::string out;
    std::string surface_out;
    double target_error = 5e-3;
    std::uint64_t max_cells = 200'000'000;
};

int cmd_pack(const PackArgs& args, const Globals& g, RunRecord& rec) {
    rec.parameters = {{"source", args.source}, {"target", args.target}, {"epsilon", args.epsilon},
                      {"out", args.out},       {"target_error", args.target_error}};
    if (!(args.epsilon > 0.0 && args.epsilon < 1.0)) throw Error(ErrorCode::invalid_parameter, "--epsilon must be in (0, 1)");
    const Surface u = read_surface(args.source);
    const Polygon target = read_polygon(args.target);
    const PackingLayout layout = pack_copies(u.domain(), target, args.epsilon);
    const Surface ut = transfer(u, layout);
    write_text(args.out, dump_json(layout_to_json(layout)));
    const std::string surface_out = args.surface_out.empty() ? args.out + ".surface.json" : args.surface_out;
    write_surface(surface_out, ut);

    QuadratureOptions q;
    q.target_error = args.target_error;
    q.max_cells = args.max_cells;
    q.threads = g.threads;
    const auto ru = resistance_quadrature(u, q);
    const auto rt = resistance_quadrature(ut, q);
    std::printf("pack %s into %zu-gon, epsilon %g\n", u.info().construction.c_str(), target.size(), args.epsilon);
    std::printf("  copies           %zu\n", layout.copies.size());
    std::printf("  rounds           %d (bound %d)\n", layout.rounds, layout.rounds_required);
    std::printf("  uncovered        %.6f\n", layout.uncovered_fraction);
    print_estimate("  R(u)", ru);
    print_estimate("  R(u~)", rt);
    std::printf("  layout -> %s, surface -> %s\n", args.out.c_str(), surface_out.c_str());
    rec.results = {{"copies", layout.copies.size()},
                   {"rounds", layout.rounds},
                   {"uncovered_fraction", layout.uncovered_fraction},
                   {"R_source", estimate_json(ru)},
                   {"R_transfer", estimate_json(rt)}};
    return ru.converged && rt.converged ? ok : budget;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Admissible surfaces of low Newtonian resistance"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--threads", g.threads, "Worker threads (0: automatic, capped by NEWTON_SIC_THREADS)");
    app.add_option("--record", g.record, "Write a JSON run record to this path");

    ConstructArgs ca;
    auto* construct = app.add_subcommand("construct", "Build a catalog surface and write its document");
    construct->add_option("name", ca.name, "ua | ub | besicovitch | flat | cone | polygon")
        ->required()
        ->check(CLI::IsMember({"ua", "ub", "besicovitch", "flat", "cone", "polygon"}));
    construct->add_option("--n", ca.n, "Besicovitch generation");
    construct->add_option("--a,--base-length", ca.a, "Length of the base segment MN");
    construct->add_option("--d", ca.d, "Trapezoid height (default sqrt(n))");
    construct->add_option("--c", ca.c, "Flat depth (default: minimal admissible)");
    construct->add_option("--level", ca.level, "Level of the flat fixture");
    construct->add_option("--slope", ca.slope, "Slope of the cone fixture");
    construct->add_option("--sides", ca.sides, "Sides of the regular polygon");
    construct->add_option("--radius", ca.radius, "Circumradius of the regular polygon");
    construct->add_option("-o,--out", ca.out, "Output document")->required();

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "Resistance of a surface document");
    eval->add_option("surface", ea.path)->required();
    eval->add_option("--method", ea.method)->check(CLI::IsMember({"quad", "mc", "both"}));
    eval->add_option("--target-error", ea.target_error, "Absolute error target of the quadrature");
    eval->add_option("--seed", ea.seed, "Monte Carlo seed");
    eval->add_option("--samples", ea.samples, "Monte Carlo samples");
    eval->add_option("--max-cells", ea.max_cells, "Quadrature cell budget");
    eval->add_option("--csv", ea.csv, "Append one CSV row per estimate");

    SicArgs sa;
    auto* sic = app.add_subcommand("check-sic", "Certify the single impact condition on sample points");
    sic->add_option("surface", sa.path)->required();
    sic->add_option("--samples", sa.samples, "Number of sample points");
    sic->add_option("--tolerance", sa.tolerance, "Residuals below -tolerance count as violations");
    sic->add_option("--mode", sa.mode)->check(CLI::IsMember({"analytic", "raytrace", "both"}));
    sic->add_option("--sampler", sa.sampler)->check(CLI::IsMember({"grid", "halton", "random"}));
    sic->add_option("--seed", sa.seed, "Seed of the random sampler");

    ConvergeArgs cv;
    auto* converge = app.add_subcommand("converge", "Resistance or bound along the Besicovitch family");
    converge->add_option("--n-min", cv.n_min, "First generation");
    converge->add_option("--n-max", cv.n_max, "Last generation");
    converge->add_option("--mode", cv.mode)->check(CLI::IsMember({"measured", "bound"}));
    converge->add_option("--csv", cv.csv, "Write the table to this path");
    converge->add_option("--a,--base-length", cv.a, "Length of the base segment MN");
    converge->add_option("--target-error", cv.target_error, "Quadrature error target in measured mode");
    converge->add_option("--max-n", cv.max_n, "Geometry budget of measured mode");
    converge->add_option("--points", cv.points, "Rows of bound mode over long ranges");

    ExportArgs xa;
    auto* exp = app.add_subcommand("export", "Write an OBJ mesh, SVG layout or CSV grid");
    exp->add_option("surface", xa.path)->required();
    exp->add_option("--format", xa.format)->check(CLI::IsMember({"obj", "svg", "csv"}));
    exp->add_option("--resolution", xa.resolution, "Grid spacing");
    exp->add_option("-o,--out", xa.out)->required();

    PackArgs pa;
    auto* pack = app.add_subcommand("pack", "Pack copies of a surface into a polygon and transfer it");
    pack->add_option("--source", pa.source, "Surface document to pack")->required();
    pack->add_option("--target", pa.target, "Polygon file or surface document with a polygon domain")->required();
    pack->add_option("--epsilon", pa.epsilon, "Uncovered fraction at which packing stops");
    pack->add_option("-o,--out", pa.out, "Layout document")->required();
    pack->add_option("--surface-out", pa.surface_out, "Transferred surface (default: <out>.surface.json)");
    pack->add_option("--target-error", pa.target_error, "Quadrature error target for both resistances");
    pack->add_option("--max-cells", pa.max_cells, "Quadrature cell budget");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    RunRecord rec;
    const auto start = std::chrono::steady_clock::now();
    int status = ok;
    try {
        if (*construct) {
            rec.command = "construct";
            status = cmd_construct(ca, rec);
        } else if (*eval) {
            rec.command = "eval";
            status = cmd_eval(ea, g, rec);
        } else if (*sic) {
            rec.command = "check-sic";
            status = cmd_check_sic(sa, g, rec);
        } else if (*converge) {
            rec.command = "converge";
            status = cmd_converge(cv, g, rec);
        } else if (*exp) {
            rec.command = "export";
            status = cmd_export(xa, rec);
        } else if (*pack) {
            rec.command = "pack";
            status = cmd_pack(pa, g, rec);
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "newton-sic: %s\n", e.what());
        return exit_for(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "newton-sic: %s\n", e.what());
        return io;
    }
    std::fflush(stdout);
    if (!g.record.empty()) {
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json r = {{"command", rec.command},
                  {"parameters", rec.parameters},
                  {"results", rec.results},
                  {"wall_time_s", wall},
                  {"exit_code", status}};
        try {
            write_text(g.record, dump_json(r));
        } catch (const Error& e) {
            std::fprintf(stderr, "newton-sic: %s\n", e.what());
            return io;
        }
    }
    return status;
}

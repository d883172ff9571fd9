#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "newton_sic/constructions.hpp"
#include "newton_sic/document.hpp"
#include "newton_sic/export.hpp"
#include "newton_sic/resistance.hpp"
#include "newton_sic/sic.hpp"

namespace py = pybind11;
using namespace newton_sic;

namespace {

using XY = std::pair<double, double>;

Point2 pt(const XY& p) { return {p.first, p.second}; }

Polygon polygon(const std::vector<XY>& v) {
    Polygon p;
    for (const auto& q : v) p.push_back(pt(q));
    return p;
}

template <class E>
E parse_enum(const std::string& name, std::initializer_list<E> values) {
    for (E v : values)
        if (name == to_string(v)) return v;
    throw Error(ErrorCode::invalid_parameter, "unknown option '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Admissible surfaces, single impact checks and Newtonian resistance";

    py::register_exception<Error>(m, "NewtonSicError", PyExc_RuntimeError);

    py::class_<Surface>(m, "Surface")
        .def_static("from_json", [](const std::string& text) { return surface_from_json(nlohmann::json::parse(text)); })
        .def("to_json", [](const Surface& s) { return dump_json(surface_to_json(s)); })
        .def_property_readonly("area", &Surface::area)
        .def_property_readonly("depth", &Surface::depth)
        .def_property_readonly("construction", [](const Surface& s) { return s.info().construction; })
        .def_property_readonly("region_count", [](const Surface& s) { return s.regions().size(); })
        .def("bbox", [](const Surface& s) {
            const Box b = s.bbox();
            return py::make_tuple(b.min_x, b.min_y, b.max_x, b.max_y);
        })
        .def("contains", [](const Surface& s, double x, double y) { return s.contains({x, y}); })
        .def("value", [](const Surface& s, double x, double y) { return s.value_at({x, y}); },
             "u(x, y), or None outside the closed domain")
        .def("gradient",
             [](const Surface& s, double x, double y) -> std::optional<XY> {
                 const SurfaceSample e = s.eval({x, y});
                 if (!e.gradient) return std::nullopt;
                 return XY{e.gradient->x, e.gradient->y};
             })
        .def("__repr__", [](const Surface& s) {
            return "<Surface " + s.info().construction + ", " + std::to_string(s.regions().size()) + " regions>";
        });

    m.def("baseline_ua", &baseline_ua);
    m.def("baseline_ub", &baseline_ub);
    m.def("besicovitch", [](int n, double a, std::optional<double> d, std::optional<double> c) {
              return besicovitch(n, a, d, c).surface;
          },
          py::arg("n"), py::arg("a") = 1.0, py::arg("d") = py::none(), py::arg("c") = py::none());
    m.def("flat_fixture", &flat_fixture, py::arg("level") = -0.25);
    m.def("cone_fixture", &cone_fixture, py::arg("slope") = 1.2);
    m.def("shrink", &shrink, py::arg("surface"), py::arg("factor"));
    m.def("regular_polygon",
          [](int sides, double radius) {
              std::vector<XY> out;
              for (const auto& p : regular_polygon(sides, radius)) out.emplace_back(p.x, p.y);
              return out;
          },
          py::arg("sides"), py::arg("radius") = 1.0);

    py::class_<ResistanceEstimate>(m, "ResistanceEstimate")
        .def_readonly("value", &ResistanceEstimate::value)
        .def_readonly("error", &ResistanceEstimate::error)
        .def_readonly("work", &ResistanceEstimate::work)
        .def_readonly("converged", &ResistanceEstimate::converged)
        .def_property_readonly("method", [](const ResistanceEstimate& e) { return to_string(e.method); })
        .def("__repr__", [](const ResistanceEstimate& e) {
            return "<ResistanceEstimate " + std::to_string(e.value) + " +/- " + std::to_string(e.error) + ">";
        });


    m.def("resistance",
          [](const Surface& s, const std::string& method, double target_error, std::uint64_t samples,
             std::uint64_t seed) {
              py::gil_scoped_release release;
              if (method == "quad") {
                  QuadratureOptions q;
                  q.target_error = target_error;
                  return resistance_quadrature(s, q);
              }
              if (method == "mc") {
                  MonteCarloOptions mc;
                  mc.samples = samples;
                  mc.seed = seed;
                  return resistance_monte_carlo(s, mc);
              }
              throw Error(ErrorCode::invalid_parameter, "method must be 'quad' or 'mc'");
          },
          py::arg("surface"), py::arg("method") = "quad", py::arg("target_error") = 1e-3,
          py::arg("samples") = 1'000'000, py::arg("seed") = 1);
    m.def("resistance_bound", &resistance_bound, py::arg("trap_area"), py::arg("small_area"), py::arg("kappa_min"));
    m.def("bound", [](double n, double a) { return BoundInputs::make(n, a).bound(); }, py::arg("n"), py::arg("a") = 1.0);
    m.def("trap_resistance_semianalytic",
          [](const std::vector<XY>& abc_mn) {
              if (abc_mn.size() != 5) throw Error(ErrorCode::invalid_parameter, "expected points A, B, C, M, N");
              const BigTriangle t{pt(abc_mn[0]), pt(abc_mn[1]), pt(abc_mn[2]), pt(abc_mn[3]), pt(abc_mn[4])};
              return trap_resistance_semianalytic(t);
          });

    m.def("sic_report",
          [](const Surface& s, std::size_t samples, double tol, const std::string& mode, const std::string& sampler,
             std::uint64_t seed) {
              SicOptions o;
              o.samples = samples;
              o.tol = tol;
              o.mode = parse_enum(mode, {SicMode::analytic, SicMode::raytrace, SicMode::both});
              o.sampler = parse_enum(sampler, {Sampler::grid, Sampler::halton, Sampler::random});
              o.seed = seed;
              SicReport r;
              {
                  py::gil_scoped_release release;
                  r = sic_report(s, o);
              }
              py::dict d;
              d["samples"] = r.samples;
              d["regular"] = r.regular;
              d["violations"] = r.violations;
              d["tangent"] = r.tangent;
              d["disagreements"] = r.disagreements;
              d["worst_residual"] = r.worst_residual;
              d["worst_clearance"] = r.worst_clearance;
              d["certified"] = r.certified();
              return d;
          },
          py::arg("surface"), py::arg("samples") = 10'000, py::arg("tol") = 1e-9, py::arg("mode") = "both",
          py::arg("sampler") = "halton", py::arg("seed") = 1);

    m.def("export",
          [](const Surface& s, const std::string& format, double resolution) {
              return export_surface(s, parse_export_format(format), resolution);
          },
          py::arg("surface"), py::arg("format"), py::arg("resolution") = 0.01);

    m.def("pack",
          [](const Surface& u, const std::vector<XY>& target, double epsilon) {
              const PackingLayout l = pack_copies(u.domain(), polygon(target), epsilon);
              return py::make_tuple(dump_json(layout_to_json(l)), transfer(u, l));
          },
          py::arg("source"), py::arg("target"), py::arg("epsilon"),
          "Returns the layout document and the transferred surface.");
}

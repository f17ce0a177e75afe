#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "pspline/fit.hpp"
#include "pspline/io.hpp"
#include "pspline/reduced.hpp"

namespace py = pybind11;
using namespace pspline;

namespace {

using XY = std::array<double, 2>;

std::vector<Point2> to_points(const std::vector<XY>& raw) {
  std::vector<Point2> pts;
  pts.reserve(raw.size());
  for (const auto& p : raw) pts.push_back({p[0], p[1]});
  return pts;
}

XY from_point(const Point2& p) { return {p.x, p.y}; }

SplitStrategy parse_strategy(const std::string& s) {
  if (s == "incenter") return SplitStrategy::Incenter;
  if (s == "barycenter") return SplitStrategy::Barycenter;
  throw py::value_error("strategy must be 'incenter' or 'barycenter'");
}

Cubic to_cubic(const std::vector<double>& monomials) {
  if (monomials.size() != 10)
    throw py::value_error("cubic takes 10 monomial coefficients "
                          "(1, x, y, x^2, xy, y^2, x^3, x^2 y, x y^2, y^3)");
  Cubic p;
  std::copy(monomials.begin(), monomials.end(), p.c.begin());
  return p;
}

py::dict fit_report_dict(const FitReport& r) {
  py::dict d;
  d["dimension"] = r.dimension;
  d["samples"] = r.samples;
  d["residual_l2"] = r.residual_l2;
  d["residual_rms"] = r.residual_rms;
  d["residual_max"] = r.residual_max;
  d["condition_estimate"] = r.condition_estimate;
  d["rank"] = r.rank;
  d["ridge"] = r.ridge;
  d["ridge_engaged"] = r.ridge_engaged;
  d["warnings"] = r.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "C1 cubic Powell-Sabin spline spaces with a super-smooth reduced basis";

  py::class_<Triangulation>(m, "Triangulation")
      .def(py::init([](const std::vector<XY>& vertices,
                       const std::vector<std::array<int, 3>>& triangles) {
             return build_triangulation(to_points(vertices), triangles);
           }),
           py::arg("vertices"), py::arg("triangles"))
      .def_property_readonly("vertices",
                             [](const Triangulation& t) {
                               std::vector<XY> out;
                               for (const auto& p : t.vertices) out.push_back(from_point(p));
                               return out;
                             })
      .def_property_readonly("triangles", [](const Triangulation& t) { return t.triangles; })
      .def_property_readonly("edges", [](const Triangulation& t) { return t.edges; })
      .def_property_readonly("num_boundary_edges",
                             [](const Triangulation& t) { return t.boundary_edge_count(); })
      .def("uniform_refine", &uniform_refine, py::arg("levels") = 1)
      .def("__repr__", [](const Triangulation& t) {
        return "<Triangulation with " + std::to_string(t.vertices.size()) + " vertices, " +
               std::to_string(t.triangles.size()) + " triangles>";
      });

  py::class_<PSRefinement, std::shared_ptr<PSRefinement>>(m, "PSRefinement")
      .def_property_readonly("symmetric", [](const PSRefinement& ps) { return ps.symmetric; })
      .def_property_readonly("split_points",
                             [](const PSRefinement& ps) {
                               std::vector<XY> out;
                               for (const auto& p : ps.split_points) out.push_back(from_point(p));
                               return out;
                             })
      .def_property_readonly("edge_split_points",
                             [](const PSRefinement& ps) {
                               std::vector<XY> out;
                               for (const auto& p : ps.edge_split_points)
                                 out.push_back(from_point(p));
                               return out;
                             })
      .def_property_readonly("warnings", [](const PSRefinement& ps) { return ps.warnings; })
      .def_property_readonly("num_micro_triangles",
                             [](const PSRefinement& ps) { return ps.ps_triangle_count(); })
      .def("dimension_report", [](const PSRefinement& ps) {
        const auto rep = dimension_report(ps);
        py::dict d;
        d["vertices"] = rep.vertices;
        d["edges"] = rep.edges;
        d["boundary_edges"] = rep.boundary_edges;
        d["triangles"] = rep.triangles;
        d["symmetric_triangles"] = rep.symmetric_triangles;
        d["full_dim"] = rep.full_dim;
        d["reduced_dim"] = rep.reduced_dim;
        d["ratio"] = rep.ratio;
        return d;
      });

  m.def(
      "refine_powell_sabin",
      [](const Triangulation& tri, const std::string& strategy, bool force_asymmetric,
         double tol) {
        RefineOptions opts;
        opts.strategy = parse_strategy(strategy);
        opts.force_asymmetric = force_asymmetric;
        opts.collinearity_tol = tol;
        return std::make_shared<PSRefinement>(refine_powell_sabin(tri, opts));
      },
      py::arg("triangulation"), py::arg("strategy") = "incenter",
      py::arg("force_asymmetric") = false, py::arg("tol") = 1e-10);

  py::class_<SplineFunction>(m, "Spline")
      .def("__call__", [](const SplineFunction& s, double x, double y) { return s.eval({x, y}); })
      .def("eval",
           [](const SplineFunction& s, const std::vector<XY>& pts) {
             std::vector<double> out;
             out.reserve(pts.size());
             for (const auto& p : pts) out.push_back(s.eval({p[0], p[1]}));
             return out;
           })
      .def("gradient",
           [](const SplineFunction& s, double x, double y) { return s.gradient({x, y}); })
      .def("smoothness_residual", [](const SplineFunction& s, int order) {
        return verify_global_smoothness(s, order).max_residual;
      });

  py::class_<C1Space, std::shared_ptr<C1Space>>(m, "C1Space")
      .def(py::init([](std::shared_ptr<PSRefinement> ps) {
             return std::make_shared<C1Space>(std::move(ps));
           }),
           py::arg("refinement"))
      .def_property_readonly("dim", &C1Space::dim)
      .def("synthesize",
           [](const C1Space& s, const std::vector<double>& c) { return s.synthesize(c); })
      .def("basis_function", &C1Space::basis_function, py::arg("index"))
      .def("analyze",
           [](const C1Space& s, const SplineFunction& f) { return s.analyze(f); })
      .def("project_cubic",
           [](const C1Space& s, const std::vector<double>& mono) {
             return project_cubic(s, to_cubic(mono));
           })
      .def("greville_points",
           [](const C1Space& s) {
             std::vector<XY> out;
             for (std::size_t i = 0; i < s.dim(); ++i) out.push_back(from_point(s.greville_point(i)));
             return out;
           })
      .def("duality_deviation",
           [](const C1Space& s) { return max_identity_deviation(duality_matrix(s)); });

  py::class_<ReducedSpace, std::shared_ptr<ReducedSpace>>(m, "ReducedSpace")
      .def(py::init([](std::shared_ptr<C1Space> c1) {
             return std::make_shared<ReducedSpace>(std::move(c1));
           }),
           py::arg("c1_space"))
      .def(py::init([](std::shared_ptr<PSRefinement> ps) {
             return std::make_shared<ReducedSpace>(std::make_shared<C1Space>(std::move(ps)));
           }),
           py::arg("refinement"))
      .def_property_readonly("dim", &ReducedSpace::dim)
      .def("synthesize",
           [](const ReducedSpace& s, const std::vector<double>& c) { return s.synthesize(c); })
      .def("basis_function", &ReducedSpace::basis_function, py::arg("index"))
      .def("analyze",
           [](const ReducedSpace& s, const SplineFunction& f, bool verify) {
             return s.analyze(f, verify);
           },
           py::arg("spline"), py::arg("verify") = false)
      .def("project_cubic",
           [](const ReducedSpace& s, const std::vector<double>& mono) {
             return project_cubic(s, to_cubic(mono));
           })
      .def("greville_points",
           [](const ReducedSpace& s) {
             std::vector<XY> out;
             for (std::size_t i = 0; i < s.dim(); ++i) out.push_back(from_point(s.greville_point(i)));
             return out;
           })
      .def("duality_deviation",
           [](const ReducedSpace& s) { return max_identity_deviation(duality_matrix(s)); })
      .def("supersmoothness_report", [](const ReducedSpace& s) {
        const auto rep = verify_supersmoothness(s);
        py::dict d;
        d["max_c1"] = rep.max_c1;
        d["max_split_spoke"] = rep.max_split_spoke;
        d["max_split_point"] = rep.max_split_point;
        d["max_sym_corner_spoke"] = rep.max_sym_corner_spoke;
        d["max_nonsym_corner_spoke"] = rep.max_nonsym_corner_spoke;
        py::list controls;
        for (const auto& ctl : rep.negative_controls) {
          py::dict c;
          c["edge"] = ctl.edge;
          c["macro"] = ctl.macro;
          c["inner"] = ctl.inner;
          c["outer"] = ctl.outer;
          controls.append(c);
        }
        d["negative_controls"] = controls;
        return d;
      });

  m.def(
      "least_squares_fit",
      [](const py::object& space, const std::vector<XY>& pts, const std::vector<double>& vals,
         double ridge) {
        const auto points = to_points(pts);
        FitResult res;
        if (py::isinstance<ReducedSpace>(space))
          res = least_squares_fit(space.cast<const ReducedSpace&>(), points, vals, ridge);
        else
          res = least_squares_fit(space.cast<const C1Space&>(), points, vals, ridge);
        return py::make_tuple(res.coefficients, fit_report_dict(res.report));
      },
      py::arg("space"), py::arg("points"), py::arg("values"), py::arg("ridge") = 0.0);

  m.def(
      "convergence_study",
      [](const std::function<double(double, double)>& f, const Triangulation& base, int levels,
         const std::string& space, const std::string& strategy, unsigned seed) {
        const auto rep = convergence_study(
            [&](const Point2& p) { return f(p.x, p.y); }, base, levels,
            space == "reduced" ? SpaceKind::Reduced : SpaceKind::C1, parse_strategy(strategy),
            seed);
        py::list levels_out;
        for (const auto& l : rep.levels) {
          py::dict d;
          d["level"] = l.level;
          d["h"] = l.h;
          d["dofs"] = l.dofs;
          d["samples"] = l.samples;
          d["linf"] = l.linf;
          d["l2"] = l.l2;
          levels_out.append(d);
        }
        py::dict out;
        out["levels"] = levels_out;
        out["observed_orders"] = rep.observed_orders;
        return out;
      },
      py::arg("f"), py::arg("base"), py::arg("levels") = 3, py::arg("space") = "reduced",
      py::arg("strategy") = "barycenter", py::arg("seed") = 1);

  m.def("load_mesh_json", &load_mesh_json, py::arg("path"));
  m.def("save_mesh_json", &save_mesh_json, py::arg("triangulation"), py::arg("path"));
  m.def(
      "load_refinement_json",
      [](const std::string& path) {
        return std::make_shared<PSRefinement>(load_refinement_json(path));
      },
      py::arg("path"));
  m.def("save_refinement_json", &save_refinement_json, py::arg("refinement"), py::arg("path"));

#ifdef VERSION_INFO
#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)
  m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}

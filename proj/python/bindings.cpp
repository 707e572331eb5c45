// Python bindings. Point sets cross the boundary as (n, 2) float arrays and
// scalar fields as Python callables taking (x, y).

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "feie/harness.hpp"

namespace py = pybind11;
using namespace feie;

namespace {

PointList to_points(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() == 1 && a.shape(0) == 2) return {Point(a.at(0), a.at(1))};
  if (a.ndim() != 2 || a.shape(1) != 2) throw InvalidArgument("points must have shape (n, 2)");
  PointList pts(a.shape(0));
  auto r = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) pts[i] = Point(r(i, 0), r(i, 1));
  return pts;
}

py::array_t<double> from_points(std::span<const Point> pts) {
  py::array_t<double> a({static_cast<py::ssize_t>(pts.size()), py::ssize_t{2}});
  auto w = a.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    w(i, 0) = pts[i].x();
    w(i, 1) = pts[i].y();
  }
  return a;
}

py::array_t<double> from_values(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

// Python callables f(x, y) -> float as library fields.
ScalarField field(const py::object& f) {
  if (f.is_none()) return {};
  if (py::isinstance<py::float_>(f) || py::isinstance<py::int_>(f)) {
    const double c = f.cast<double>();
    return [c](const Point&) { return c; };
  }
  py::function fn = f;
  return [fn](const Point& x) { return fn(x.x(), x.y()).cast<double>(); };
}

BoundaryField boundary_field(const py::object& f) {
  if (py::isinstance<py::float_>(f) || py::isinstance<py::int_>(f)) {
    const double c = f.cast<double>();
    return [c](const Point&, const Point&) { return c; };
  }
  py::function fn = f;
  return [fn](const Point& x, const Point& n) { return fn(x.x(), x.y(), n.x(), n.y()).cast<double>(); };
}

Rect rect(const py::object& box) {
  if (py::isinstance<Rect>(box)) return box.cast<Rect>();
  if (py::isinstance<py::float_>(box) || py::isinstance<py::int_>(box)) return Rect::square(box.cast<double>());
  const auto v = box.cast<std::vector<double>>();
  if (v.size() != 4) throw InvalidArgument("box must be a half-width or (x_min, x_max, y_min, y_max)");
  return {v[0], v[1], v[2], v[3]};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Coupled finite element and integral equation solver for the Poisson equation";

  auto base = py::register_exception<Error>(m, "FeieError");
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<NearBoundaryError>(m, "NearBoundaryError", base.ptr());
  py::register_exception<QbxGeometryError>(m, "QbxGeometryError", base.ptr());
  py::register_exception<SolverError>(m, "SolverError", base.ptr());
  py::register_exception<UnsupportedCaseError>(m, "UnsupportedCaseError", base.ptr());
  py::register_exception<VerificationError>(m, "VerificationError", base.ptr());

  py::class_<Rect>(m, "Rect")
      .def(py::init([](double x0, double x1, double y0, double y1) { return Rect{x0, x1, y0, y1}; }), py::arg("x_min"),
           py::arg("x_max"), py::arg("y_min"), py::arg("y_max"))
      .def_static("square", &Rect::square, py::arg("half_width"))
      .def_readwrite("x_min", &Rect::x_min)
      .def_readwrite("x_max", &Rect::x_max)
      .def_readwrite("y_min", &Rect::y_min)
      .def_readwrite("y_max", &Rect::y_max)
      .def_property_readonly("area", &Rect::area);

  // geometry
  py::class_<Curve, std::shared_ptr<Curve>>(m, "Curve")
      .def("position", [](const Curve& c, double t) { return c.position(t); })
      .def("normal", &Curve::normal)
      .def("speed", &Curve::speed)
      .def("arclength", &Curve::arclength, py::arg("panels") = 64, py::arg("points") = 20);
  m.def("circle", [](double cx, double cy, double r) { return std::const_pointer_cast<Curve>(circle({cx, cy}, r)); },
        py::arg("cx") = 0.0, py::arg("cy") = 0.0, py::arg("radius") = 0.5);
  m.def("starfish", [] { return std::const_pointer_cast<Curve>(starfish()); });

  py::class_<BoundaryDiscretization>(m, "BoundaryDiscretization")
      .def_property_readonly("size", &BoundaryDiscretization::size)
      .def_property_readonly("panel_count", &BoundaryDiscretization::panel_count)
      .def_property_readonly("nodes_per_panel", &BoundaryDiscretization::nodes_per_panel)
      .def_property_readonly("h_ie", &BoundaryDiscretization::h_ie)
      .def_property_readonly("nodes", [](const BoundaryDiscretization& d) { return from_points(d.nodes()); })
      .def_property_readonly("normals", [](const BoundaryDiscretization& d) { return from_points(d.normals()); })
      .def_property_readonly("weights", [](const BoundaryDiscretization& d) {
        return py::array_t<double>(d.size(), d.weights().data());
      })
      .def("total_weight", &BoundaryDiscretization::total_weight)
      .def("__len__", &BoundaryDiscretization::size);
  m.def("build_panels",
        [](std::shared_ptr<Curve> c, int n, int q) { return build_panels(std::move(c), n, q); },
        py::arg("curve"), py::arg("n_panels"), py::arg("q") = 8);

  py::enum_<Region>(m, "Region")
      .value("Inside", Region::Inside)
      .value("Outside", Region::Outside)
      .value("NearBoundary", Region::NearBoundary);
  m.def("point_in_domain",
        [](const BoundaryDiscretization& d, double x, double y, double nf) { return point_in_domain(d, {x, y}, nf); },
        py::arg("disc"), py::arg("x"), py::arg("y"), py::arg("near_factor") = 2.0);

  // potentials
  py::enum_<LayerKind>(m, "LayerKind")
      .value("Single", LayerKind::Single)
      .value("Double", LayerKind::Double)
      .value("SingleNormalDeriv", LayerKind::SingleNormalDeriv);
  py::enum_<Side>(m, "Side")
      .value("Interior", Side::Interior)
      .value("Exterior", Side::Exterior)
      .value("PrincipalValue", Side::PrincipalValue);

  py::class_<QbxConfig>(m, "QbxConfig")
      .def(py::init([](int order, double offset, int upsample) {
             QbxConfig c{order, offset, upsample};
             c.validate();
             return c;
           }),
           py::arg("order") = 4, py::arg("center_offset") = 0.35, py::arg("upsample") = 5)
      .def_readwrite("order", &QbxConfig::order)
      .def_readwrite("center_offset", &QbxConfig::center_offset)
      .def_readwrite("upsample", &QbxConfig::upsample);

  py::class_<LayerPotentials, std::shared_ptr<LayerPotentials>>(m, "LayerPotentials")
      .def(py::init<const BoundaryDiscretization&, QbxConfig>(), py::arg("disc"), py::arg("cfg") = QbxConfig{})
      .def("onsurface_matrix", &LayerPotentials::onsurface_matrix, py::arg("kind"),
           py::arg("side") = Side::PrincipalValue)
      .def(
          "evaluate",
          [](const LayerPotentials& lp, LayerKind k, const Eigen::VectorXd& d, const py::array_t<double>& t) {
            return lp.evaluate(k, d, to_points(t));
          },
          py::arg("kind"), py::arg("density"), py::arg("targets"))
      .def(
          "evaluate_side",
          [](const LayerPotentials& lp, LayerKind k, const Eigen::VectorXd& d, const py::array_t<double>& t, Side s) {
            return lp.evaluate_side(k, d, to_points(t), s);
          },
          py::arg("kind"), py::arg("density"), py::arg("targets"), py::arg("side"))
      .def(
          "indicator", [](const LayerPotentials& lp, const py::array_t<double>& t) { return lp.indicator(to_points(t)); },
          py::arg("targets"));

  m.def(
      "eval_direct",
      [](const BoundaryDiscretization& d, const Eigen::VectorXd& dens, LayerKind k, const py::array_t<double>& t) {
        return eval_direct(d, dens, k, to_points(t));
      },
      py::arg("disc"), py::arg("density"), py::arg("kind"), py::arg("targets"));
  m.def(
      "eval_qbx",
      [](const BoundaryDiscretization& d, const Eigen::VectorXd& dens, LayerKind k, const py::array_t<double>& t,
         Side s, const QbxConfig& cfg) { return eval_qbx(d, dens, k, to_points(t), s, cfg); },
      py::arg("disc"), py::arg("density"), py::arg("kind"), py::arg("targets"), py::arg("side"),
      py::arg("cfg") = QbxConfig{});

  // fem and solvers
  py::enum_<FeBackend>(m, "FeBackend")
      .value("Tensor", FeBackend::Tensor)
      .value("Direct", FeBackend::Direct)
      .value("Iterative", FeBackend::Iterative);

  py::class_<FESpace, std::shared_ptr<FESpace>>(m, "FESpace")
      .def(py::init([](const py::object& box, double h, int degree) {
             return std::make_shared<FESpace>(FEMesh::uniform(rect(box), h), degree);
           }),
           py::arg("box"), py::arg("h"), py::arg("degree"))
      .def_property_readonly("n_dofs", &FESpace::n_dofs)
      .def_property_readonly("degree", &FESpace::degree)
      .def_property_readonly("h", [](const FESpace& s) { return s.mesh().h(); });

  py::class_<FEFunction>(m, "FEFunction")
      .def_readonly("values", &FEFunction::values)
      .def("__call__", [](const FEFunction& u, const py::array_t<double>& p) { return from_values(eval_fe(u, to_points(p))); })
      .def("grad", [](const FEFunction& u, const py::array_t<double>& p) {
        const auto g = eval_fe_grad(u, to_points(p));
        return from_points(g);
      });

  m.def(
      "solve_dirichlet",
      [](std::shared_ptr<FESpace> s, const py::object& f, const py::object& g, FeBackend b) {
        return solve_dirichlet(std::move(s), field(f), field(g), b);
      },
      py::arg("space"), py::arg("f"), py::arg("g"), py::arg("backend") = FeBackend::Tensor);

  py::class_<GmresOptions>(m, "GmresOptions")
      .def(py::init<>())
      .def_readwrite("restart", &GmresOptions::restart)
      .def_readwrite("tol", &GmresOptions::tol)
      .def_readwrite("max_iters", &GmresOptions::max_iters);

  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("iterations", &SolveReport::iterations)
      .def_readonly("inner_iterations", &SolveReport::inner_iterations)
      .def_readonly("relative_residual", &SolveReport::relative_residual)
      .def_readonly("converged", &SolveReport::converged)
      .def_readonly("residual_history", &SolveReport::residual_history);

  m.def(
      "gmres",
      [](const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const GmresOptions& o) {
        const SolveResult r = gmres(LinearOperator::from_matrix(a), b, o);
        return py::make_tuple(r.x, r.report);
      },
      py::arg("a"), py::arg("b"), py::arg("options") = GmresOptions{});
  m.def("dense_solve", &dense_solve, py::arg("a"), py::arg("b"));

  // coupled problems
  py::enum_<SolveMode>(m, "SolveMode").value("MatrixFree", SolveMode::MatrixFree).value("Assembled", SolveMode::Assembled);
  py::enum_<ProblemKind>(m, "ProblemKind")
      .value("Interior", ProblemKind::Interior)
      .value("Exclusion", ProblemKind::Exclusion)
      .value("Interface", ProblemKind::Interface);

  py::class_<CoupledSettings>(m, "CoupledSettings")
      .def(py::init([](int degree, double h_fe, int qbx_order, SolveMode mode, FeBackend backend) {
             CoupledSettings s;
             s.degree = degree;
             s.h_fe = h_fe;
             s.qbx.order = qbx_order;
             s.mode = mode;
             s.backend = backend;
             return s;
           }),
           py::arg("degree") = 2, py::arg("h_fe") = 0.04, py::arg("qbx_order") = 3,
           py::arg("mode") = SolveMode::MatrixFree, py::arg("backend") = FeBackend::Tensor)
      .def_readwrite("degree", &CoupledSettings::degree)
      .def_readwrite("h_fe", &CoupledSettings::h_fe)
      .def_readwrite("qbx", &CoupledSettings::qbx)
      .def_readwrite("mode", &CoupledSettings::mode)
      .def_readwrite("backend", &CoupledSettings::backend)
      .def_readwrite("gmres", &CoupledSettings::gmres);

  py::class_<InterfaceCoefficients>(m, "InterfaceCoefficients")
      .def_readonly("alpha1", &InterfaceCoefficients::alpha1)
      .def_readonly("alpha2", &InterfaceCoefficients::alpha2)
      .def_readonly("alpha3", &InterfaceCoefficients::alpha3)
      .def_readonly("alpha4", &InterfaceCoefficients::alpha4);
  m.def("select_alphas", &select_alphas, py::arg("kappa"), py::arg("c"));

  py::class_<CoupledSolution>(m, "CoupledSolution")
      .def_readonly("kind", &CoupledSolution::kind)
      .def_readonly("gamma", &CoupledSolution::gamma)
      .def_readonly("gamma_out", &CoupledSolution::gamma_out)
      .def_readonly("u1", &CoupledSolution::u1)
      .def_readonly("u1_out", &CoupledSolution::u1_out)
      .def_readonly("alphas", &CoupledSolution::alphas)
      .def_readonly("report", &CoupledSolution::report)
      .def("contains", [](const CoupledSolution& s, double x, double y) { return s.contains({x, y}); })
      .def("__call__",
           [](const CoupledSolution& s, const py::array_t<double>& p) { return from_values(s.evaluate(to_points(p))); })
      .def("evaluate_side", [](const CoupledSolution& s, const py::array_t<double>& p, Side side) {
        return from_values(s.evaluate_side(to_points(p), side));
      });

  m.def(
      "solve_interior",
      [](std::shared_ptr<Curve> curve, const py::object& box, const py::object& f, const py::object& g, int panels,
         const CoupledSettings& s) {
        InteriorProblem p{curve, rect(box), field(f), field(g)};
        return solve_interior(p, build_panels(curve, panels, 8), s);
      },
      py::arg("curve"), py::arg("box"), py::arg("f"), py::arg("g"), py::arg("panels") = 30,
      py::arg("settings") = CoupledSettings{});
  m.def(
      "solve_exclusion",
      [](std::shared_ptr<Curve> curve, const py::object& box, const py::object& f, const py::object& g,
         const py::object& g_outer, int panels, const CoupledSettings& s) {
        ExclusionProblem p{curve, rect(box), field(f), field(g), field(g_outer)};
        return solve_exclusion(p, build_panels(curve, panels, 8), s);
      },
      py::arg("curve"), py::arg("box"), py::arg("f"), py::arg("g"), py::arg("g_outer"), py::arg("panels") = 28,
      py::arg("settings") = CoupledSettings{});
  m.def(
      "solve_interface",
      [](std::shared_ptr<Curve> curve, const py::object& inner_box, const py::object& outer_box,
         const py::object& f_in, const py::object& f_out, double kappa, double c, const py::object& a,
         const py::object& b, const py::object& g_outer, int panels, const CoupledSettings& s) {
        InterfaceProblem p{curve, rect(inner_box), rect(outer_box), field(f_in), field(f_out), kappa, c,
                           field(a),  boundary_field(b), field(g_outer)};
        return solve_interface(p, build_panels(curve, panels, 8), s);
      },
      py::arg("curve"), py::arg("inner_box"), py::arg("outer_box"), py::arg("f_in"), py::arg("f_out"),
      py::arg("kappa"), py::arg("c"), py::arg("a"), py::arg("b"), py::arg("g_outer"), py::arg("panels") = 28,
      py::arg("settings") = CoupledSettings{});

  // harness
  py::class_<ConvergenceRow>(m, "ConvergenceRow")
      .def_readonly("case_name", &ConvergenceRow::case_name)
      .def_readonly("level", &ConvergenceRow::level)
      .def_readonly("h_fe", &ConvergenceRow::h_fe)
      .def_readonly("h_ie", &ConvergenceRow::h_ie)
      .def_readonly("n_boundary", &ConvergenceRow::n_boundary)
      .def_readonly("n_dofs", &ConvergenceRow::n_dofs)
      .def_readonly("err_inf", &ConvergenceRow::err_inf)
      .def_readonly("err_l2", &ConvergenceRow::err_l2)
      .def_readonly("eoc_inf", &ConvergenceRow::eoc_inf)
      .def_readonly("eoc_l2", &ConvergenceRow::eoc_l2)
      .def_readonly("outer_iters", &ConvergenceRow::outer_iters)
      .def_readonly("inner_iters", &ConvergenceRow::inner_iters)
      .def_readonly("wall_s", &ConvergenceRow::wall_s);

  py::class_<ConvergenceRecord>(m, "ConvergenceRecord")
      .def_readonly("metadata", &ConvergenceRecord::metadata)
      .def_readonly("rows", &ConvergenceRecord::rows)
      .def("meta", &ConvergenceRecord::meta)
      .def("series", &ConvergenceRecord::series)
      .def("to_csv",
           [](const ConvergenceRecord& r) {
             std::ostringstream s;
             write_csv(r, s);
             return s.str();
           })
      .def("table", [](const ConvergenceRecord& r) {
        std::ostringstream s;
        print_table(r, s);
        return s.str();
      });

  m.def("case_names", &case_names);
  m.def(
      "run_convergence",
      [](const std::string& name, int degree, int qbx_order, int levels, int samples, std::optional<double> kappa,
         std::optional<double> c, bool timing) {
        StudyOptions o;
        o.degree = degree;
        o.qbx_order = qbx_order > 0 ? qbx_order : degree + 1;
        o.levels = levels;
        o.samples = samples;
        o.timing = timing;
        return run_convergence(make_case(name, {kappa, c, std::nullopt}), o);
      },
      py::arg("case"), py::arg("degree") = 2, py::arg("qbx_order") = 0, py::arg("levels") = 0,
      py::arg("samples") = 400, py::arg("kappa") = py::none(), py::arg("c") = py::none(), py::arg("timing") = true);
  m.def("read_csv", [](const std::string& text) {
    std::istringstream s(text);
    return read_csv(s);
  });
  m.def("eoc", [](const std::vector<double>& e, const std::vector<double>& h) { return eoc(e, h); }, py::arg("errors"),
        py::arg("hs"));
}

#include "feie/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace feie {

const char* const kCsvHeader =
    "case,level,h_fe,h_ie,n_boundary,n_dofs,err_inf,err_l2,eoc_inf,eoc_l2,outer_iters,inner_iters,wall_s";

namespace {

using std::numbers::pi;
using Clock = std::chrono::steady_clock;

double xi_bl(double z) { return 1.0 - (5.0 / 3.0) * std::abs(z); }
double eta_pw(double z) { return z <= 0.0 ? -1.0 : 1.0; }

ScalarField constant(double v) {
  return [v](const Point&) { return v; };
}

TestCase interior_case(const std::string& name, ScalarField f, ScalarField g, ScalarField exact, VectorField grad) {
  TestCase tc;
  tc.name = name;
  tc.kind = ProblemKind::Interior;
  tc.geometry = "circle";
  tc.curve = circle({0.0, 0.0}, 0.5);
  tc.interior = {tc.curve, Rect::square(0.6), std::move(f), std::move(g)};
  tc.exact = std::move(exact);
  tc.grad_exact = std::move(grad);
  tc.h0 = 0.04;
  tc.panels0 = 30;
  tc.levels = 3;
  return tc;
}

TestCase exclusion_starfish() {
  TestCase tc;
  tc.name = "exclusion-starfish";
  tc.kind = ProblemKind::Exclusion;
  tc.geometry = "starfish";
  tc.curve = starfish();
  const Point x0(0.1, -0.02);
  auto u = [x0](const Point& x) {
    return std::log((x - x0).norm()) + 2.0 * std::sin(pi * x.x()) * std::sin(pi * x.y());
  };
  auto grad = [x0](const Point& x) -> Point {
    const Point d = x - x0;
    return d / d.squaredNorm() + 2.0 * pi * Point(std::cos(pi * x.x()) * std::sin(pi * x.y()),
                                                  std::sin(pi * x.x()) * std::cos(pi * x.y()));
  };
  auto f = [](const Point& x) { return 4.0 * pi * pi * std::sin(pi * x.x()) * std::sin(pi * x.y()); };
  tc.exclusion = {tc.curve, Rect::square(1.0), f, u, u};
  tc.exact = u;
  tc.grad_exact = grad;
  tc.h0 = 2.0 / 15.0;
  tc.panels0 = 14;
  tc.levels = 4;
  return tc;
}

// Sets a and b so the exact pair satisfies the jump conditions for the given kappa, c.
void derive_jump_data(TestCase& tc) {
  auto ui = tc.exact, ue = tc.exact_out;
  auto gi = tc.grad_exact, ge = tc.grad_exact_out;
  const double kappa = tc.interface.kappa, c = tc.interface.c;
  tc.interface.a = [ui, ue, c](const Point& x) { return ui(x) - c * ue(x); };
  tc.interface.b = [gi, ge, kappa](const Point& x, const Point& n) { return gi(x).dot(n) - kappa * ge(x).dot(n); };
}

TestCase interface_case(const std::string& name, const CaseOptions& opts) {
  TestCase tc;
  tc.name = name;
  tc.kind = ProblemKind::Interface;
  tc.h0 = 0.08;
  tc.panels0 = 14;
  tc.levels = 4;
  InterfaceProblem& p = tc.interface;
  p.outer_box = Rect::square(1.0);
  if (name == "interface-quadlog") {
    tc.geometry = "circle";
    tc.curve = circle({0.0, 0.0}, 0.5);
    p.inner_box = Rect::square(opts.inner_box.value_or(0.6));
    tc.exact = [](const Point& x) { return -5.0 / 6.0 * x.squaredNorm(); };
    tc.grad_exact = [](const Point& x) -> Point { return -5.0 / 3.0 * x; };
    // exterior branch sign-adjusted for the shared normal out of the interior
    tc.exact_out = [](const Point& x) { return -1.25 * std::log(2.0 * x.norm()) - 11.0 / 24.0; };
    tc.grad_exact_out = [](const Point& x) -> Point { return -1.25 * x / x.squaredNorm(); };
    p.f_in = constant(10.0 / 3.0);
    p.f_out = constant(0.0);
    p.kappa = 1.0 / 3.0;
    p.c = 1.0;
    p.a = constant(0.25);
    p.b = [](const Point&, const Point&) { return 0.0; };
  } else {
    tc.geometry = "starfish";
    tc.curve = starfish();
    p.inner_box = Rect::square(opts.inner_box.value_or(0.8));
    auto s = [](const Point& x) { return std::sin(2.0 * pi * x.x()) * std::sin(2.0 * pi * x.y()); };
    auto gs = [](const Point& x) -> Point {
      return 2.0 * pi * Point(std::cos(2.0 * pi * x.x()) * std::sin(2.0 * pi * x.y()),
                              std::sin(2.0 * pi * x.x()) * std::cos(2.0 * pi * x.y()));
    };
    auto f = [s](const Point& x) { return 8.0 * pi * pi * s(x); };
    p.f_in = f;
    p.f_out = f;
    p.kappa = 1.0;
    p.c = 1.0;
    if (name == "interface-sinelinear") {
      tc.exact = [s](const Point& x) { return s(x) + x.x() + x.y(); };
      tc.grad_exact = [gs](const Point& x) -> Point { return gs(x) + Point(1.0, 1.0); };
      p.a = [](const Point& x) { return x.x() + x.y(); };
      p.b = [](const Point&, const Point& n) { return n.x() + n.y(); };
    } else {
      tc.exact = s;
      tc.grad_exact = gs;
      p.a = constant(0.0);
      p.b = [](const Point&, const Point&) { return 0.0; };
    }
    tc.exact_out = s;
    tc.grad_exact_out = gs;
  }
  p.curve = tc.curve;
  p.g_outer = tc.exact_out;
  const double kappa = opts.kappa.value_or(p.kappa);
  const double c = opts.c.value_or(p.c);
  select_alphas(kappa, c);  // rejects unsupported combinations up front
  if (kappa != p.kappa || c != p.c) {
    p.kappa = kappa;
    p.c = c;
    derive_jump_data(tc);
  }
  return tc;
}

std::function<bool(const Point&)> inside_of(std::shared_ptr<const BoundaryDiscretization> disc, bool want_inside) {
  return [disc, want_inside](const Point& x) { return locate(*disc, x).inside == want_inside; };
}

struct ErrorRegion {
  std::string suffix;
  Rect box;
  bool inside;
};

std::vector<ErrorRegion> regions_of(const TestCase& tc) {
  switch (tc.kind) {
    case ProblemKind::Interior:
      return {{"", tc.interior.box, true}};
    case ProblemKind::Exclusion:
      return {{"", tc.exclusion.box, false}};
    case ProblemKind::Interface:
      return {{":interior", tc.interface.inner_box, true}, {":exterior", tc.interface.outer_box, false}};
  }
  return {};
}

CoupledSolution solve_case(const TestCase& tc, const BoundaryDiscretization& disc, const CoupledSettings& s) {
  switch (tc.kind) {
    case ProblemKind::Interior:
      return solve_interior(tc.interior, disc, s);
    case ProblemKind::Exclusion:
      return solve_exclusion(tc.exclusion, disc, s);
    case ProblemKind::Interface:
      return solve_interface(tc.interface, disc, s);
  }
  throw InvalidArgument("unknown problem kind");
}

long dof_count(const CoupledSolution& sol) {
  long n = sol.u1.space ? sol.u1.space->n_dofs() : 0;
  if (sol.u1_out.space) n += sol.u1_out.space->n_dofs();
  return n;
}

[[noreturn]] void rethrow_at_level(int level) {
  const std::string prefix = level < 0 ? std::string("reference solution: ") : "level " + std::to_string(level) + ": ";
  try {
    throw;
  } catch (const SolverError& e) {
    throw SolverError(prefix + e.what());
  } catch (const QbxGeometryError& e) {
    throw QbxGeometryError(prefix + e.what());
  } catch (const NearBoundaryError& e) {
    throw NearBoundaryError(prefix + e.what());
  } catch (const UnsupportedCaseError& e) {
    throw UnsupportedCaseError(prefix + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(prefix + e.what());
  } catch (const VerificationError& e) {
    throw VerificationError(prefix + e.what());
  } catch (const Error& e) {
    throw Error(prefix + e.what());
  }
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw InvalidArgument("CSV: bad number '" + s + "'");
  return v;
}

long parse_long(const std::string& s) {
  long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw InvalidArgument("CSV: bad integer '" + s + "'");
  return v;
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

std::vector<std::string> case_names() {
  return {"interior-fc",        "interior-fbl",         "interior-fpw",
          "interior-harmonic",  "interior-linear",      "exclusion-starfish",
          "interface-quadlog",  "interface-sinelinear", "interface-continuity"};
}

TestCase make_case(const std::string& name, const CaseOptions& opts) {
  const bool is_interface = name.rfind("interface-", 0) == 0;
  if (!is_interface && (opts.kappa || opts.c || opts.inner_box)) {
    throw InvalidArgument("--kappa, --c and --inner-box apply to interface cases only");
  }
  if (name == "interior-fc") return interior_case(name, constant(1.0), constant(0.0), {}, {});
  if (name == "interior-fbl") {
    return interior_case(name, [](const Point& x) { return xi_bl(x.x()) * xi_bl(x.y()); }, constant(0.0), {}, {});
  }
  if (name == "interior-fpw") {
    return interior_case(name, [](const Point& x) { return eta_pw(x.x()) * eta_pw(x.y()); }, constant(0.0), {}, {});
  }
  if (name == "interior-harmonic") {
    auto u = [](const Point& x) { return x.x() * x.x() - x.y() * x.y(); };
    return interior_case(name, constant(0.0), u, u, [](const Point& x) -> Point { return {2.0 * x.x(), -2.0 * x.y()}; });
  }
  if (name == "interior-linear") {
    auto u = [](const Point& x) { return x.x() + x.y(); };
    return interior_case(name, constant(0.0), u, u, [](const Point&) -> Point { return {1.0, 1.0}; });
  }
  if (name == "exclusion-starfish") return exclusion_starfish();
  if (name == "interface-quadlog" || name == "interface-sinelinear" || name == "interface-continuity") {
    return interface_case(name, opts);
  }
  std::string list;
  for (const auto& n : case_names()) list += (list.empty() ? "" : ", ") + n;
  throw InvalidArgument("unknown case '" + name + "' (known: " + list + ")");
}

void verify_case(const TestCase& tc, const BoundaryDiscretization& disc, double jump_tol) {
  if (!tc.has_exact()) return;
  auto check_pde = [&](const ScalarField& u, const ScalarField& f, const Rect& box, bool inside, const char* what) {
    auto classify = std::make_shared<const BoundaryDiscretization>(disc);
    const SampleSet s = sample_region(box, 24, inside_of(classify, inside));
    if (s.points.empty()) return;
    double scale = 1.0;
    for (const Point& x : s.points) scale = std::max(scale, std::abs(f(x)));
    const double r = pde_residual(u, f, s.points);
    if (r > 1e-5 * scale) {
      std::ostringstream msg;
      msg << tc.name << ": the exact " << what << " solution does not satisfy -Laplace u = f (residual " << r << ")";
      throw VerificationError(msg.str());
    }
  };
  switch (tc.kind) {
    case ProblemKind::Interior:
      check_pde(tc.exact, tc.interior.f, tc.interior.box, true, "interior");
      for (const Point& x : disc.nodes()) {
        if (std::abs(tc.exact(x) - tc.interior.g(x)) > jump_tol) {
          throw VerificationError(tc.name + ": boundary data g differs from the exact solution on the curve");
        }
      }
      break;
    case ProblemKind::Exclusion:
      check_pde(tc.exact, tc.exclusion.f, tc.exclusion.box, false, "exterior");
      for (const Point& x : disc.nodes()) {
        if (std::abs(tc.exact(x) - tc.exclusion.g(x)) > jump_tol) {
          throw VerificationError(tc.name + ": boundary data g differs from the exact solution on the curve");
        }
      }
      break;
    case ProblemKind::Interface: {
      check_pde(tc.exact, tc.interface.f_in, tc.interface.inner_box, true, "interior");
      check_pde(tc.exact_out, tc.interface.f_out, tc.interface.outer_box, false, "exterior");
      const JumpCheck jc =
          check_jumps(tc.interface, disc, tc.exact, tc.grad_exact, tc.exact_out, tc.grad_exact_out);
      if (jc.value > jump_tol || jc.flux_shared > jump_tol) {
        std::ostringstream msg;
        msg << tc.name << ": manufactured data violates the interface conditions (value " << jc.value
            << ", flux " << jc.flux_shared << "; with the opposite normal the flux residual is "
            << jc.flux_opposite << ")";
        throw VerificationError(msg.str());
      }
      break;
    }
  }
}

SampleSet sample_region(const Rect& box, int density, const std::function<bool(const Point&)>& in_region) {
  if (density < 1) throw InvalidArgument("sample_region: density must be positive");
  SampleSet s;
  const double dx = box.width() / density, dy = box.height() / density;
  s.cell_area = dx * dy;
  for (int j = 0; j < density; ++j) {
    for (int i = 0; i < density; ++i) {
      const Point x(box.x_min + (i + 0.5) * dx, box.y_min + (j + 0.5) * dy);
      if (in_region(x)) s.points.push_back(x);
    }
  }
  return s;
}

ErrorNorms compute_errors(std::span<const double> numeric, std::span<const double> reference, double cell_area) {
  if (numeric.size() != reference.size()) throw InvalidArgument("compute_errors: length mismatch");
  if (numeric.empty()) throw InvalidArgument("compute_errors: empty sample set");
  ErrorNorms e;
  double sum = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    const double d = std::abs(numeric[i] - reference[i]);
    e.linf = std::max(e.linf, d);
    sum += d * d;
  }
  e.l2 = std::sqrt(sum * cell_area);
  return e;
}

ErrorNorms compute_errors(const ScalarField& numeric, const ScalarField& reference, const SampleSet& samples) {
  std::vector<double> a(samples.points.size()), b(samples.points.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = numeric(samples.points[i]);
    b[i] = reference(samples.points[i]);
  }
  return compute_errors(a, b, samples.cell_area);
}

std::vector<double> eoc(std::span<const double> errors, std::span<const double> hs) {
  if (errors.size() != hs.size() || errors.size() < 2) {
    throw InvalidArgument("eoc: need at least two errors and matching mesh sizes");
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0)) throw InvalidArgument("eoc: errors must be positive");
    if (!(hs[i] > 0.0)) throw InvalidArgument("eoc: mesh sizes must be positive");
    if (i > 0 && !(hs[i] < hs[i - 1])) throw InvalidArgument("eoc: mesh sizes must decrease");
  }
  std::vector<double> out;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    out.push_back(std::log(errors[i - 1] / errors[i]) / std::log(hs[i - 1] / hs[i]));
  }
  return out;
}

bool ConvergenceRow::operator==(const ConvergenceRow& o) const {
  return case_name == o.case_name && level == o.level && h_fe == o.h_fe && h_ie == o.h_ie &&
         n_boundary == o.n_boundary && n_dofs == o.n_dofs && err_inf == o.err_inf && err_l2 == o.err_l2 &&
         same(eoc_inf, o.eoc_inf) && same(eoc_l2, o.eoc_l2) && outer_iters == o.outer_iters &&
         inner_iters == o.inner_iters && wall_s == o.wall_s;
}

std::string ConvergenceRecord::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return {};
}

std::vector<ConvergenceRow> ConvergenceRecord::series(const std::string& name) const {
  std::vector<ConvergenceRow> out;
  for (const auto& r : rows) {
    if (r.case_name == name) out.push_back(r);
  }
  return out;
}

ConvergenceRecord run_convergence(const TestCase& tc, const StudyOptions& opts) {
  const int levels = opts.levels > 0 ? opts.levels : tc.levels;
  const double h0 = opts.h0 > 0.0 ? opts.h0 : tc.h0;
  const int panels0 = opts.panels0 > 0 ? opts.panels0 : tc.panels0;
  if (levels < 2) throw InvalidArgument("run_convergence: need at least two levels");
  auto log = [&](const std::string& m) {
    if (opts.progress) opts.progress(m);
  };

  ConvergenceRecord rec;
  auto meta = [&](const std::string& k, const std::string& v) { rec.metadata.emplace_back(k, v); };
  meta("case", tc.name);
  meta("geometry", tc.geometry);
  meta("p", std::to_string(opts.degree));
  meta("p_qbx", std::to_string(opts.qbx_order));
  meta("nodes_per_panel", std::to_string(opts.nodes_per_panel));
  meta("qbx_center_offset", fmt(QbxConfig{}.center_offset));
  meta("qbx_upsample", std::to_string(QbxConfig{}.upsample));
  meta("mode", opts.mode == SolveMode::MatrixFree ? "matrix-free" : "assembled");
  meta("solver", opts.backend == FeBackend::Tensor ? "tensor" : opts.backend == FeBackend::Direct ? "direct"
                                                                                                 : "iterative");
  meta("gmres_restart", std::to_string(opts.gmres.restart));
  meta("gmres_tol", fmt(opts.gmres.tol));
  meta("samples", std::to_string(opts.samples) + "x" + std::to_string(opts.samples) + " cell-centred grid");
  if (tc.kind == ProblemKind::Interface) {
    meta("kappa", fmt(tc.interface.kappa));
    meta("c", fmt(tc.interface.c));
    meta("inner_box", fmt(tc.interface.inner_box.x_max));
  }
  meta("timing", opts.timing ? "on" : "off");

  // Classification of samples uses a fine panelization; locate projects onto the
  // exact curve near it, so the result does not depend on the level.
  auto classify = std::make_shared<const BoundaryDiscretization>(
      build_panels(tc.curve, std::max(128, panels0 << (levels - 1)), opts.nodes_per_panel));
  verify_case(tc, *classify);

  const std::vector<ErrorRegion> regions = regions_of(tc);
  std::vector<SampleSet> samples;
  for (const ErrorRegion& r : regions) {
    samples.push_back(sample_region(r.box, opts.samples, inside_of(classify, r.inside)));
    if (samples.back().points.empty()) throw InvalidArgument(tc.name + ": empty sample set");
  }

  std::vector<std::vector<double>> truth(regions.size());
  if (tc.has_exact()) {
    meta("error", "exact solution");
    for (std::size_t k = 0; k < regions.size(); ++k) {
      const ScalarField& u = (k == 0 || !tc.exact_out) ? tc.exact : tc.exact_out;
      for (const Point& x : samples[k].points) truth[k].push_back(u(x));
    }
  } else {
    const ReferenceRecipe& ref = opts.reference;
    const ReferenceRecipe default_ref;
    meta("error", "self-convergence");
    meta("reference", "p=" + std::to_string(ref.degree) + " p_qbx=" + std::to_string(ref.qbx_order) +
                          " h_fe=" + fmt(ref.h_fe) + " panels=" + std::to_string(ref.panels));
    if (ref.degree != default_ref.degree || ref.qbx_order != default_ref.qbx_order || ref.h_fe != default_ref.h_fe ||
        ref.panels != default_ref.panels) {
      meta("reference_scaled", "yes");
    }
    log("reference solution");
    CoupledSettings s;
    s.degree = ref.degree;
    s.h_fe = ref.h_fe;
    s.qbx.order = ref.qbx_order;
    s.backend = opts.backend;
    s.gmres = opts.gmres;
    try {
      const auto disc = build_panels(tc.curve, ref.panels, opts.nodes_per_panel);
      const CoupledSolution sol = solve_case(tc, disc, s);
      for (std::size_t k = 0; k < regions.size(); ++k) truth[k] = sol.evaluate(samples[k].points);
    } catch (const Error&) {
      rethrow_at_level(-1);
    }
  }

  std::vector<std::vector<ConvergenceRow>> per_region(regions.size());
  for (int level = 0; level < levels; ++level) {
    const double h = h0 / static_cast<double>(1 << level);
    const int panels = panels0 << level;
    log("level " + std::to_string(level) + ": h_fe=" + fmt(h) + " panels=" + std::to_string(panels));
    CoupledSettings s;
    s.degree = opts.degree;
    s.h_fe = h;
    s.qbx.order = opts.qbx_order;
    s.backend = opts.backend;
    s.mode = opts.mode;
    s.gmres = opts.gmres;
    try {
      const auto t0 = Clock::now();
      const auto disc = build_panels(tc.curve, panels, opts.nodes_per_panel);
      const CoupledSolution sol = solve_case(tc, disc, s);
      const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
      for (std::size_t k = 0; k < regions.size(); ++k) {
        const std::vector<double> v = sol.evaluate(samples[k].points);
        const ErrorNorms e = compute_errors(v, truth[k], samples[k].cell_area);
        ConvergenceRow row;
        row.case_name = tc.name + regions[k].suffix;
        row.level = level;
        row.h_fe = h;
        row.h_ie = disc.h_ie();
        row.n_boundary = disc.size();
        row.n_dofs = dof_count(sol);
        row.err_inf = e.linf;
        row.err_l2 = e.l2;
        row.outer_iters = sol.report.iterations;
        row.inner_iters = sol.report.inner_iterations;
        row.wall_s = opts.timing ? wall : 0.0;
        per_region[k].push_back(row);
      }
    } catch (const Error&) {
      rethrow_at_level(level);
    }
  }

  bool flagged = false;
  for (auto& rows : per_region) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
      auto fill = [&](double a, double b, double& out) {
        if (a < opts.eoc_floor && b < opts.eoc_floor) {
          flagged = true;
          return;
        }
        const double es[2] = {a, b}, hs[2] = {rows[i - 1].h_fe, rows[i].h_fe};
        out = eoc(es, hs)[0];
      };
      fill(rows[i - 1].err_inf, rows[i].err_inf, rows[i].eoc_inf);
      fill(rows[i - 1].err_l2, rows[i].err_l2, rows[i].eoc_l2);
    }
    rec.rows.insert(rec.rows.end(), rows.begin(), rows.end());
  }
  if (flagged) meta("eoc_flag", "errors at solver-tolerance scale; EOC left blank");
  return rec;
}

void write_csv(const ConvergenceRecord& rec, std::ostream& out) {
  for (const auto& [k, v] : rec.metadata) out << "# " << k << '=' << v << '\n';
  out << kCsvHeader << '\n';
  for (const auto& r : rec.rows) {
    out << r.case_name << ',' << r.level << ',' << fmt(r.h_fe) << ',' << fmt(r.h_ie) << ',' << r.n_boundary << ','
        << r.n_dofs << ',' << fmt(r.err_inf) << ',' << fmt(r.err_l2) << ',' << fmt(r.eoc_inf) << ','
        << fmt(r.eoc_l2) << ',' << r.outer_iters << ',' << r.inner_iters << ',' << fmt(r.wall_s) << '\n';
  }
}

ConvergenceRecord read_csv(std::istream& in) {
  ConvergenceRecord rec;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw InvalidArgument("CSV: malformed metadata line '" + line + "'");
      rec.metadata.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    if (!header) {
      if (line != kCsvHeader) throw InvalidArgument("CSV: unexpected header '" + line + "'");
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 13) throw InvalidArgument("CSV: expected 13 fields in '" + line + "'");
    ConvergenceRow r;
    r.case_name = f[0];
    r.level = static_cast<int>(parse_long(f[1]));
    r.h_fe = parse_double(f[2]);
    r.h_ie = parse_double(f[3]);
    r.n_boundary = static_cast<int>(parse_long(f[4]));
    r.n_dofs = parse_long(f[5]);
    r.err_inf = parse_double(f[6]);
    r.err_l2 = parse_double(f[7]);
    r.eoc_inf = parse_double(f[8]);
    r.eoc_l2 = parse_double(f[9]);
    r.outer_iters = static_cast<int>(parse_long(f[10]));
    r.inner_iters = parse_long(f[11]);
    r.wall_s = parse_double(f[12]);
    rec.rows.push_back(r);
  }
  if (!header) throw InvalidArgument("CSV: missing header");
  return rec;
}

void print_table(const ConvergenceRecord& rec, std::ostream& out) {
  std::vector<std::string> names;
  for (const auto& r : rec.rows) {
    if (std::find(names.begin(), names.end(), r.case_name) == names.end()) names.push_back(r.case_name);
  }
  const auto flags = out.flags();
  auto eocs = [](double v) {
    if (std::isnan(v)) return std::string("--");
    std::ostringstream s;
    s << std::fixed << std::setprecision(1) << v;
    return s.str();
  };
  for (const auto& name : names) {
    out << name << "  (p=" << rec.meta("p") << ", p_qbx=" << rec.meta("p_qbx") << ")\n";
    out << "  h_fe     h_ie     N_h    dofs       err_inf    EOC   err_l2     EOC   outer  inner    wall_s\n";
    for (const auto& r : rec.series(name)) {
      out << "  " << std::fixed << std::setprecision(3) << std::setw(7) << r.h_fe << "  " << std::setw(7)
          << r.h_ie << "  " << std::setw(5) << r.n_boundary << "  " << std::setw(9) << r.n_dofs << "  "
          << std::scientific << std::setprecision(3) << r.err_inf << "  " << std::setw(4) << eocs(r.eoc_inf)
          << "  " << std::scientific << r.err_l2 << "  " << std::setw(4) << eocs(r.eoc_l2) << "  "
          << std::setw(5) << r.outer_iters << "  " << std::setw(5) << r.inner_iters << "  " << std::fixed
          << std::setprecision(2) << std::setw(8) << r.wall_s << '\n';
    }
    out << '\n';
  }
  out.flags(flags);
}

}  // namespace feie

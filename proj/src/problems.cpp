#include "feie/problems.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace feie {

namespace {

using Clock = std::chrono::steady_clock;

void check_inside(const BoundaryDiscretization& disc, const Rect& box, const char* what) {
  const Curve& curve = disc.curve();
  constexpr int samples = 2000;
  for (int i = 0; i < samples; ++i) {
    const Point x = curve.position(static_cast<double>(i) / samples);
    if (!box.contains(x) || !(box.boundary_distance(x) > 0.0)) {
      throw InvalidArgument(std::string("the boundary curve must lie strictly inside the ") + what);
    }
  }
}

std::shared_ptr<const FESpace> make_space(const Rect& box, const CoupledSettings& s) {
  return std::make_shared<const FESpace>(FEMesh::uniform(box, s.h_fe), s.degree);
}

PointList boundary_points(const FESpace& space) {
  PointList pts;
  pts.reserve(space.boundary_dofs().size());
  for (int i : space.boundary_dofs()) pts.push_back(space.node(i));
  return pts;
}

Eigen::VectorXd sample(const ScalarField& f, std::span<const Point> pts) {
  Eigen::VectorXd v(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) v[i] = f(pts[i]);
  return v;
}

// Solves with the configured mode; throws SolverError when GMRES stalls.
SolveResult run_solver(const LinearOperator& op, const Eigen::VectorXd& rhs, const CoupledSettings& s,
                       const std::function<Eigen::MatrixXd()>& assemble) {
  if (s.mode == SolveMode::Assembled) {
    const auto t0 = Clock::now();
    SolveResult res;
    const Eigen::MatrixXd m = assemble();
    res.x = dense_solve(m, rhs);
    const double bn = rhs.norm();
    res.report.relative_residual = bn > 0.0 ? (rhs - m * res.x).norm() / bn : 0.0;
    res.report.converged = true;
    res.report.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return res;
  }
  SolveResult res = gmres(op, rhs, s.gmres);
  if (!res.report.converged) {
    throw SolverError("GMRES(" + std::to_string(s.gmres.restart) + ") did not converge after " +
                      std::to_string(res.report.iterations) + " iterations (relative residual " +
                      std::to_string(res.report.relative_residual) + ")");
  }
  return res;
}

Eigen::MatrixXd assemble_columns(const LinearOperator& op) {
  Eigen::MatrixXd m(op.dim, op.dim);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(op.dim), y(op.dim);
  for (int j = 0; j < op.dim; ++j) {
    e[j] = 1.0;
    op.apply(e, y);
    m.col(j) = y;
    e[j] = 0.0;
  }
  return m;
}

void add(std::vector<double>& out, const std::vector<std::size_t>& idx, const Eigen::VectorXd& v, double scale) {
  if (scale == 0.0) return;
  for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] += scale * v[k];
}

}  // namespace

InterfaceCoefficients select_alphas(double kappa, double c) {
  if (kappa == 0.0) throw InvalidArgument("select_alphas: kappa must be nonzero");
  if (kappa == -c) {
    throw UnsupportedCaseError("interface coefficients with kappa = -c are not supported (left to future work)");
  }
  InterfaceCoefficients a;
  if (kappa == c) {
    a.which = InterfaceCoefficients::Case::KappaEqualsC;
    a.alpha2 = 1.0;
    a.alpha3 = -1.0 / kappa;
    a.alpha4 = 1.0 / kappa;
  } else {
    a.which = InterfaceCoefficients::Case::General;
    a.alpha2 = 0.0;
    a.alpha3 = 1.0 / (kappa - c);
    a.alpha4 = 1.0 / kappa;
  }
  a.alpha1 = kappa * a.alpha3;
  return a;
}

// ---------------------------------------------------------------------------

bool CoupledSolution::contains(const Point& x) const {
  switch (kind) {
    case ProblemKind::Interior:
      return u1.space->mesh().box().contains(x);
    case ProblemKind::Exclusion:
      return u1.space->mesh().box().contains(x) && !locate(discretization(), x).inside;
    case ProblemKind::Interface:
      return u1_out.space->mesh().box().contains(x);
  }
  return false;
}

std::vector<double> CoupledSolution::evaluate(std::span<const Point> points) const {
  const BoundaryDiscretization& disc = discretization();
  PointList in_pts, out_pts;
  std::vector<std::size_t> in_idx, out_idx;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!contains(points[i])) {
      throw InvalidArgument("evaluate: point (" + std::to_string(points[i].x()) + ", " +
                            std::to_string(points[i].y()) + ") is outside the computational domain");
    }
    if (locate(disc, points[i]).inside) {
      in_pts.push_back(points[i]);
      in_idx.push_back(i);
    } else {
      out_pts.push_back(points[i]);
      out_idx.push_back(i);
    }
  }
  std::vector<double> out(points.size(), 0.0);
  auto add_fe = [&](const FEFunction& u, const PointList& pts, const std::vector<std::size_t>& idx) {
    const std::vector<double> v = eval_fe(u, pts);
    for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] += v[k];
  };
  switch (kind) {
    case ProblemKind::Interior:
      add_fe(u1, in_pts, in_idx);
      add_fe(u1, out_pts, out_idx);
      add(out, in_idx, potentials->evaluate(LayerKind::Double, gamma, in_pts), 1.0);
      break;
    case ProblemKind::Exclusion:
      add_fe(u1, out_pts, out_idx);
      add(out, out_idx, potentials->evaluate(LayerKind::Double, gamma, out_pts), 1.0);
      add(out, out_idx, potentials->evaluate(LayerKind::Single, gamma, out_pts), 1.0);
      break;
    case ProblemKind::Interface:
      for (const Point& x : in_pts) {
        if (!u1.space->mesh().box().contains(x)) throw InvalidArgument("evaluate: interior point outside the inner box");
      }
      add_fe(u1, in_pts, in_idx);
      add(out, in_idx, potentials->evaluate(LayerKind::Double, gamma, in_pts), alphas.alpha1);
      if (alphas.alpha2 != 0.0) add(out, in_idx, potentials->evaluate(LayerKind::Single, gamma_out, in_pts), alphas.alpha2);
      add_fe(u1_out, out_pts, out_idx);
      add(out, out_idx, potentials->evaluate(LayerKind::Double, gamma, out_pts), alphas.alpha3);
      add(out, out_idx, potentials->evaluate(LayerKind::Single, gamma_out, out_pts), alphas.alpha4);
      break;
  }
  return out;
}

std::vector<double> CoupledSolution::evaluate_side(std::span<const Point> points, Side side) const {
  if (side == Side::PrincipalValue) throw InvalidArgument("evaluate_side: choose the interior or exterior side");
  const PointList pts(points.begin(), points.end());
  std::vector<double> out;
  auto lp = [&](LayerKind k, const Eigen::VectorXd& d) { return potentials->evaluate_side(k, d, pts, side); };
  const bool interior = side == Side::Interior;
  switch (kind) {
    case ProblemKind::Interior: {
      out = eval_fe(u1, pts);
      if (interior) {
        const Eigen::VectorXd v = lp(LayerKind::Double, gamma);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
      }
      break;
    }
    case ProblemKind::Exclusion: {
      if (interior) throw InvalidArgument("evaluate_side: the exclusion solution lives outside Gamma only");
      out = eval_fe(u1, pts);
      const Eigen::VectorXd v = lp(LayerKind::Double, gamma) + lp(LayerKind::Single, gamma);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
      break;
    }
    case ProblemKind::Interface: {
      out = eval_fe(interior ? u1 : u1_out, pts);
      const double ad = interior ? alphas.alpha1 : alphas.alpha3;
      const double as = interior ? alphas.alpha2 : alphas.alpha4;
      Eigen::VectorXd v = ad * lp(LayerKind::Double, gamma);
      if (as != 0.0) v += as * lp(LayerKind::Single, gamma_out);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

InteriorSystem::InteriorSystem(const InteriorProblem& prob, const BoundaryDiscretization& disc,
                               const CoupledSettings& settings)
    : settings_(settings) {
  check_inside(disc, prob.box, "embedding rectangle");
  lp_ = std::make_shared<const LayerPotentials>(disc, settings.qbx);
  const auto space = make_space(prob.box, settings);
  const DirichletSolver solver(space, settings.backend);
  u1_ = solver.solve(assemble_load(*space, prob.f), Eigen::VectorXd::Zero(space->boundary_dofs().size()));
  const auto nodes = disc.nodes();
  const std::vector<double> trace = eval_fe(u1_, nodes);
  matrix_ = lp_->onsurface_matrix(LayerKind::Double, Side::PrincipalValue);
  matrix_.diagonal().array() -= 0.5;
  rhs_ = sample(prob.g, nodes) - Eigen::Map<const Eigen::VectorXd>(trace.data(), trace.size());
}

CoupledSolution InteriorSystem::solve() const {
  const SolveResult res =
      run_solver(LinearOperator::from_matrix(matrix_), rhs_, settings_, [this] { return matrix_; });
  CoupledSolution sol;
  sol.kind = ProblemKind::Interior;
  sol.potentials = lp_;
  sol.gamma = res.x;
  sol.u1 = u1_;
  sol.report = res.report;
  return sol;
}

// ---------------------------------------------------------------------------

ExclusionSystem::ExclusionSystem(const ExclusionProblem& prob, const BoundaryDiscretization& disc,
                                 const CoupledSettings& settings)
    : settings_(settings) {
  check_inside(disc, prob.box, "computational rectangle");
  lp_ = std::make_shared<const LayerPotentials>(disc, settings.qbx);
  space_ = make_space(prob.box, settings);
  solver_ = std::make_shared<DirichletSolver>(space_, settings.backend);

  ie_ = lp_->onsurface_matrix(LayerKind::Double, Side::PrincipalValue) +
        lp_->onsurface_matrix(LayerKind::Single, Side::PrincipalValue);
  ie_.diagonal().array() += 0.5;
  const PointList bd = boundary_points(*space_);
  outer_ = lp_->target_matrix(LayerKind::Double, bd) + lp_->target_matrix(LayerKind::Single, bd);
  trace_ = evaluation_matrix(*space_, disc.nodes());

  load_ = assemble_load(*space_, prob.f);
  zero_load_ = Eigen::VectorXd::Zero(space_->n_dofs());
  g_outer_ = solver_->boundary_values(prob.g_outer);
  const FEFunction u0 = solver_->solve(load_, g_outer_);
  rhs_ = sample(prob.g, disc.nodes()) - trace_ * u0.values;
}

void ExclusionSystem::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  const FEFunction w = solver_->solve(zero_load_, outer_ * x);
  y.noalias() = ie_ * x;
  y.noalias() -= trace_ * w.values;
}

LinearOperator ExclusionSystem::op() const {
  return {dim(), [this](const Eigen::VectorXd& x, Eigen::VectorXd& y) { apply(x, y); }};
}

Eigen::MatrixXd ExclusionSystem::assemble() const { return assemble_columns(op()); }

Eigen::MatrixXd ExclusionSystem::assemble_compact_part() const {
  Eigen::MatrixXd m = assemble();
  m.diagonal().array() -= 0.5;
  return m;
}

CoupledSolution ExclusionSystem::finish(const Eigen::VectorXd& gamma, const SolveReport& report) const {
  CoupledSolution sol;
  sol.kind = ProblemKind::Exclusion;
  sol.potentials = lp_;
  sol.gamma = gamma;
  sol.u1 = solver_->solve(load_, g_outer_ - outer_ * gamma);
  sol.report = report;
  return sol;
}

CoupledSolution ExclusionSystem::solve() const {
  const long inner0 = solver_->inner_iterations();
  SolveResult res = run_solver(op(), rhs_, settings_, [this] { return assemble(); });
  res.report.inner_iterations = solver_->inner_iterations() - inner0;
  return finish(res.x, res.report);
}

// ---------------------------------------------------------------------------

InterfaceSystem::InterfaceSystem(const InterfaceProblem& prob, const BoundaryDiscretization& disc,
                                 const CoupledSettings& settings)
    : settings_(settings), alphas_(select_alphas(prob.kappa, prob.c)), kappa_(prob.kappa), c_(prob.c) {
  check_inside(disc, prob.inner_box, "inner rectangle");
  const Rect& ib = prob.inner_box;
  const Rect& ob = prob.outer_box;
  if (!ob.contains({ib.x_min, ib.y_min}) || !ob.contains({ib.x_max, ib.y_max})) {
    throw InvalidArgument("the inner rectangle must lie inside the outer rectangle");
  }
  lp_ = std::make_shared<const LayerPotentials>(disc, settings.qbx);
  space_in_ = make_space(ib, settings);
  space_out_ = make_space(ob, settings);
  solver_in_ = std::make_shared<DirichletSolver>(space_in_, settings.backend);
  solver_out_ = std::make_shared<DirichletSolver>(space_out_, settings.backend);

  const int n = disc.size();
  const auto& a = alphas_;
  ie_ = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  ie_.topLeftCorner(n, n) = (kappa_ - c_) * a.alpha3 * lp_->onsurface_matrix(LayerKind::Double, Side::PrincipalValue);
  ie_.topLeftCorner(n, n).diagonal().array() -= 0.5 * (kappa_ + c_) * a.alpha3;
  ie_.topRightCorner(n, n) = (a.alpha2 - c_ * a.alpha4) * lp_->onsurface_matrix(LayerKind::Single, Side::PrincipalValue);
  const double sp_coef = a.alpha2 - kappa_ * a.alpha4;
  if (sp_coef != 0.0) {
    ie_.bottomRightCorner(n, n) =
        sp_coef * lp_->onsurface_matrix(LayerKind::SingleNormalDeriv, Side::PrincipalValue);
  }
  ie_.bottomRightCorner(n, n).diagonal().array() += 0.5 * (a.alpha2 + kappa_ * a.alpha4);

  const PointList bd = boundary_points(*space_out_);
  outer_.resize(static_cast<Eigen::Index>(bd.size()), 2 * n);
  outer_.leftCols(n) = a.alpha3 * lp_->target_matrix(LayerKind::Double, bd);
  outer_.rightCols(n) = a.alpha4 * lp_->target_matrix(LayerKind::Single, bd);

  const auto nodes = disc.nodes();
  const auto normals = disc.normals();
  trace_out_ = evaluation_matrix(*space_out_, nodes);
  dn_out_ = normal_derivative_matrix(*space_out_, nodes, normals);
  const SparseMatrix trace_in = evaluation_matrix(*space_in_, nodes);
  const SparseMatrix dn_in = normal_derivative_matrix(*space_in_, nodes, normals);

  u0_in_ = solver_in_->solve(assemble_load(*space_in_, prob.f_in),
                             Eigen::VectorXd::Zero(space_in_->boundary_dofs().size()));
  load_out_ = assemble_load(*space_out_, prob.f_out);
  zero_load_ = Eigen::VectorXd::Zero(space_out_->n_dofs());
  g_outer_ = solver_out_->boundary_values(prob.g_outer);
  const FEFunction u0_out = solver_out_->solve(load_out_, g_outer_);

  rhs_.resize(2 * n);
  rhs_.head(n) = sample(prob.a, nodes) - trace_in * u0_in_.values + c_ * (trace_out_ * u0_out.values);
  Eigen::VectorXd bv(n);
  for (int i = 0; i < n; ++i) bv[i] = prob.b(nodes[i], normals[i]);
  rhs_.tail(n) = bv - dn_in * u0_in_.values + kappa_ * (dn_out_ * u0_out.values);
}

void InterfaceSystem::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  const FEFunction w = solver_out_->solve(zero_load_, outer_ * x);
  const Eigen::Index n = x.size() / 2;
  y.noalias() = ie_ * x;
  y.head(n).noalias() += c_ * (trace_out_ * w.values);
  y.tail(n).noalias() += kappa_ * (dn_out_ * w.values);
}

LinearOperator InterfaceSystem::op() const {
  return {dim(), [this](const Eigen::VectorXd& x, Eigen::VectorXd& y) { apply(x, y); }};
}

Eigen::MatrixXd InterfaceSystem::assemble() const { return assemble_columns(op()); }

CoupledSolution InterfaceSystem::finish(const Eigen::VectorXd& gamma, const SolveReport& report) const {
  const Eigen::Index n = gamma.size() / 2;
  CoupledSolution sol;
  sol.kind = ProblemKind::Interface;
  sol.potentials = lp_;
  sol.gamma = gamma.head(n);
  sol.gamma_out = gamma.tail(n);
  sol.u1 = u0_in_;
  sol.u1_out = solver_out_->solve(load_out_, g_outer_ - outer_ * gamma);
  sol.alphas = alphas_;
  sol.report = report;
  return sol;
}

CoupledSolution InterfaceSystem::solve() const {
  const long inner0 = inner_iterations();
  SolveResult res = run_solver(op(), rhs_, settings_, [this] { return assemble(); });
  res.report.inner_iterations = inner_iterations() - inner0;
  return finish(res.x, res.report);
}

// ---------------------------------------------------------------------------

CoupledSolution solve_interior(const InteriorProblem& prob, const BoundaryDiscretization& disc,
                               const CoupledSettings& settings) {
  return InteriorSystem(prob, disc, settings).solve();
}

CoupledSolution solve_exclusion(const ExclusionProblem& prob, const BoundaryDiscretization& disc,
                                const CoupledSettings& settings) {
  return ExclusionSystem(prob, disc, settings).solve();
}

CoupledSolution solve_interface(const InterfaceProblem& prob, const BoundaryDiscretization& disc,
                                const CoupledSettings& settings) {
  return InterfaceSystem(prob, disc, settings).solve();
}

JumpCheck check_jumps(const InterfaceProblem& prob, const BoundaryDiscretization& disc, const ScalarField& u_in,
                      const VectorField& grad_in, const ScalarField& u_out, const VectorField& grad_out) {
  JumpCheck jc;
  for (int i = 0; i < disc.size(); ++i) {
    const Point& x = disc.node(i);
    const Point& n = disc.normal(i);
    const double di = grad_in(x).dot(n);
    const double de = grad_out(x).dot(n);
    const double b = prob.b(x, n);
    jc.value = std::max(jc.value, std::abs(u_in(x) - prob.c * u_out(x) - prob.a(x)));
    jc.flux_shared = std::max(jc.flux_shared, std::abs(di - prob.kappa * de - b));
    jc.flux_opposite = std::max(jc.flux_opposite, std::abs(di + prob.kappa * de - b));
  }
  return jc;
}

double pde_residual(const ScalarField& u, const ScalarField& f, std::span<const Point> points, double h) {
  double worst = 0.0;
  const Point ex(h, 0.0), ey(0.0, h);
  for (const Point& x : points) {
    const double c = u(x);
    auto second = [&](const Point& e) {
      return (-u(x + 2.0 * e) + 16.0 * u(x + e) - 30.0 * c + 16.0 * u(x - e) - u(x - 2.0 * e)) / (12.0 * h * h);
    };
    worst = std::max(worst, std::abs(-(second(ex) + second(ey)) - f(x)));
  }
  return worst;
}

}  // namespace feie

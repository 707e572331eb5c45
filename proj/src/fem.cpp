#include "feie/fem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "feie/quadrature.hpp"

namespace feie {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Reference element matrices on [0, 1] for the Lagrange basis on `nodes`.
void reference_matrices(std::span<const double> nodes, Eigen::MatrixXd& stiff, Eigen::MatrixXd& mass) {
  const int n = static_cast<int>(nodes.size());
  const auto rule = quadrature::gauss_legendre(n + 1);
  stiff = Eigen::MatrixXd::Zero(n, n);
  mass = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> v(n), d(n);
  for (int k = 0; k < rule.size(); ++k) {
    quadrature::lagrange_derivatives(nodes, rule.points[k], v, d);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        stiff(a, b) += rule.weights[k] * d[a] * d[b];
        mass(a, b) += rule.weights[k] * v[a] * v[b];
      }
    }
  }
}

SparseMatrix assemble_1d(int n_el, int p, const Eigen::MatrixXd& local, double scale) {
  Triplets t;
  t.reserve(static_cast<std::size_t>(n_el) * (p + 1) * (p + 1));
  for (int e = 0; e < n_el; ++e) {
    for (int a = 0; a <= p; ++a) {
      for (int b = 0; b <= p; ++b) t.emplace_back(e * p + a, e * p + b, scale * local(a, b));
    }
  }
  SparseMatrix m(n_el * p + 1, n_el * p + 1);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

// Kronecker sum A_y (x) M_x + M_y (x) A_x for the node ordering iy * nx + ix.
SparseMatrix kron_sum(const SparseMatrix& ay, const SparseMatrix& mx, const SparseMatrix& my,
                      const SparseMatrix& ax) {
  const Eigen::Index nx = ax.rows();
  const Eigen::Index ny = ay.rows();
  Triplets t;
  t.reserve(static_cast<std::size_t>(ay.nonZeros()) * mx.nonZeros() * 2);
  auto add = [&](const SparseMatrix& slow, const SparseMatrix& fast) {
    for (int js = 0; js < slow.outerSize(); ++js) {
      for (SparseMatrix::InnerIterator is(slow, js); is; ++is) {
        for (int jf = 0; jf < fast.outerSize(); ++jf) {
          for (SparseMatrix::InnerIterator itf(fast, jf); itf; ++itf) {
            t.emplace_back(is.row() * nx + itf.row(), is.col() * nx + itf.col(), is.value() * itf.value());
          }
        }
      }
    }
  };
  add(ay, mx);
  add(my, ax);
  SparseMatrix k(nx * ny, nx * ny);
  k.setFromTriplets(t.begin(), t.end());
  return k;
}

Eigen::MatrixXd interior_block(const SparseMatrix& m) {
  const Eigen::Index n = m.rows() - 2;
  return Eigen::MatrixXd(m).block(1, 1, n, n);
}

}  // namespace

FEMesh::FEMesh(const Rect& box, int nx, int ny) : box_(box), nx_(nx), ny_(ny) {
  if (nx < 2 || ny < 2) throw InvalidArgument("FEMesh: need at least 2 elements per axis");
  if (!(box.width() > 0.0) || !(box.height() > 0.0)) throw InvalidArgument("FEMesh: empty rectangle");
  h_ = box.width() / nx;
  if (std::abs(box.height() / ny - h_) > 1e-10 * h_) throw InvalidArgument("FEMesh: elements must be square");
}

FEMesh FEMesh::uniform(const Rect& box, double h) {
  if (!(h > 0.0)) throw InvalidArgument("FEMesh: element size must be positive");
  const int nx = static_cast<int>(std::lround(box.width() / h));
  const int ny = static_cast<int>(std::lround(box.height() / h));
  return FEMesh(box, nx, ny);
}

FESpace::FESpace(const FEMesh& mesh, int degree) : mesh_(mesh), p_(degree) {
  if (degree < 1 || degree > 4) throw InvalidArgument("FESpace: degree must be between 1 and 4");
  ref_ = quadrature::gauss_lobatto(degree + 1).points;
  const Rect& b = mesh.box();
  const double h = mesh.h();
  auto axis = [&](double lo, int n_el, std::vector<double>& out) {
    out.clear();
    for (int e = 0; e < n_el; ++e) {
      for (int a = 0; a < p_; ++a) out.push_back(lo + (e + ref_[a]) * h);
    }
    out.push_back(lo + n_el * h);
  };
  axis(b.x_min, mesh.nx(), xs_);
  axis(b.y_min, mesh.ny(), ys_);
  xs_.back() = b.x_max;
  ys_.back() = b.y_max;

  for (int i = 0; i < n_dofs(); ++i) {
    if (is_boundary(i)) boundary_.push_back(i);
  }

  Eigen::MatrixXd ks, ms;
  reference_matrices(ref_, ks, ms);
  ax_ = assemble_1d(mesh.nx(), p_, ks, 1.0 / h);
  mx_ = assemble_1d(mesh.nx(), p_, ms, h);
  ay_ = assemble_1d(mesh.ny(), p_, ks, 1.0 / h);
  my_ = assemble_1d(mesh.ny(), p_, ms, h);
}

bool FESpace::is_boundary(int i) const {
  const int ix = i % nodes_x();
  const int iy = i / nodes_x();
  return ix == 0 || iy == 0 || ix == nodes_x() - 1 || iy == nodes_y() - 1;
}

void FESpace::locate(const Point& x, int& ex, int& ey, double& xi, double& eta) const {
  const Rect& b = mesh_.box();
  const double tol = 1e-12 * std::max(b.width(), b.height());
  if (!b.contains(x, tol)) {
    throw InvalidArgument("FE evaluation point (" + std::to_string(x.x()) + ", " + std::to_string(x.y()) +
                          ") lies outside the mesh");
  }
  const double h = mesh_.h();
  const double sx = (x.x() - b.x_min) / h;
  const double sy = (x.y() - b.y_min) / h;
  ex = std::clamp(static_cast<int>(std::ceil(sx)) - 1, 0, mesh_.nx() - 1);
  ey = std::clamp(static_cast<int>(std::ceil(sy)) - 1, 0, mesh_.ny() - 1);
  xi = std::clamp(sx - ex, 0.0, 1.0);
  eta = std::clamp(sy - ey, 0.0, 1.0);
}

SparseMatrix assemble_stiffness(const FESpace& space) {
  return kron_sum(space.stiffness_1d(1), space.mass_1d(0), space.mass_1d(1), space.stiffness_1d(0));
}

SparseMatrix assemble_mass(const FESpace& space) {
  const SparseMatrix& mx = space.mass_1d(0);
  const SparseMatrix& my = space.mass_1d(1);
  const Eigen::Index nx = mx.rows();
  Triplets t;
  for (int js = 0; js < my.outerSize(); ++js) {
    for (SparseMatrix::InnerIterator is(my, js); is; ++is) {
      for (int jf = 0; jf < mx.outerSize(); ++jf) {
        for (SparseMatrix::InnerIterator itf(mx, jf); itf; ++itf) {
          t.emplace_back(is.row() * nx + itf.row(), is.col() * nx + itf.col(), is.value() * itf.value());
        }
      }
    }
  }
  SparseMatrix m(space.n_dofs(), space.n_dofs());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Eigen::VectorXd assemble_load(const FESpace& space, const ScalarField& f) {
  const int p = space.degree();
  const auto rule = quadrature::gauss_legendre(p + 2);
  const int nq = rule.size();
  Eigen::MatrixXd basis(p + 1, nq);
  std::vector<double> v(p + 1);
  for (int k = 0; k < nq; ++k) {
    quadrature::lagrange_values(space.reference_nodes(), rule.points[k], v);
    for (int a = 0; a <= p; ++a) basis(a, k) = v[a];
  }
  const FEMesh& mesh = space.mesh();
  const double h = mesh.h();
  const Rect& b = mesh.box();
  Eigen::VectorXd load = Eigen::VectorXd::Zero(space.n_dofs());
  Eigen::MatrixXd fq(nq, nq), local(p + 1, p + 1);
  for (int ey = 0; ey < mesh.ny(); ++ey) {
    for (int ex = 0; ex < mesh.nx(); ++ex) {
      for (int l = 0; l < nq; ++l) {
        const double y = b.y_min + (ey + rule.points[l]) * h;
        for (int k = 0; k < nq; ++k) {
          const double x = b.x_min + (ex + rule.points[k]) * h;
          fq(k, l) = rule.weights[k] * rule.weights[l] * h * h * f(Point(x, y));
        }
      }
      local.noalias() = basis * fq * basis.transpose();
      for (int bb = 0; bb <= p; ++bb) {
        for (int a = 0; a <= p; ++a) load[space.index(ex * p + a, ey * p + bb)] += local(a, bb);
      }
    }
  }
  return load;
}

FEFunction lift(std::shared_ptr<const FESpace> space, const ScalarField& g) {
  FEFunction u{space, Eigen::VectorXd::Zero(space->n_dofs())};
  for (int i : space->boundary_dofs()) u.values[i] = g(space->node(i));
  return u;
}

struct DirichletSolver::Impl {
  std::vector<int> interior;  // interior dof indices
  // Tensor backend
  Eigen::MatrixXd vx, vy;
  Eigen::VectorXd lx, ly;
  // Direct / iterative backends
  SparseMatrix kii;
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> chol;
  std::unique_ptr<SymmetricGaussSeidel> sgs;
};

DirichletSolver::DirichletSolver(std::shared_ptr<const FESpace> space, FeBackend backend, PcgOptions pcg)
    : space_(std::move(space)), backend_(backend), pcg_(pcg), impl_(std::make_unique<Impl>()) {
  const FESpace& s = *space_;
  for (int i = 0; i < s.n_dofs(); ++i) {
    if (!s.is_boundary(i)) impl_->interior.push_back(i);
  }
  if (backend_ == FeBackend::Tensor) {
    auto diag = [](const SparseMatrix& a, const SparseMatrix& m, Eigen::MatrixXd& v, Eigen::VectorXd& l) {
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(interior_block(a), interior_block(m));
      if (es.info() != Eigen::Success) throw SolverError("DirichletSolver: generalized eigensolver failed");
      v = es.eigenvectors();
      l = es.eigenvalues();
    };
    diag(s.stiffness_1d(0), s.mass_1d(0), impl_->vx, impl_->lx);
    diag(s.stiffness_1d(1), s.mass_1d(1), impl_->vy, impl_->ly);
    return;
  }
  const SparseMatrix k = assemble_stiffness(s);
  std::vector<int> pos(s.n_dofs(), -1);
  for (std::size_t i = 0; i < impl_->interior.size(); ++i) pos[impl_->interior[i]] = static_cast<int>(i);
  Triplets t;
  t.reserve(k.nonZeros());
  for (int j = 0; j < k.outerSize(); ++j) {
    if (pos[j] < 0) continue;
    for (SparseMatrix::InnerIterator it(k, j); it; ++it) {
      if (pos[it.row()] >= 0) t.emplace_back(pos[it.row()], pos[j], it.value());
    }
  }
  const auto ni = static_cast<Eigen::Index>(impl_->interior.size());
  impl_->kii.resize(ni, ni);
  impl_->kii.setFromTriplets(t.begin(), t.end());
  if (backend_ == FeBackend::Direct) {
    impl_->chol.compute(impl_->kii);
    if (impl_->chol.info() != Eigen::Success) {
      throw SolverError("DirichletSolver: Cholesky factorization failed (stiffness not positive definite)");
    }
  } else {
    impl_->sgs = std::make_unique<SymmetricGaussSeidel>(impl_->kii);
  }
}

DirichletSolver::~DirichletSolver() = default;

Eigen::VectorXd DirichletSolver::apply_stiffness(const Eigen::VectorXd& u) const {
  const FESpace& s = *space_;
  const int nx = s.nodes_x(), ny = s.nodes_y();
  Eigen::Map<const Eigen::MatrixXd> um(u.data(), nx, ny);
  Eigen::VectorXd out(u.size());
  Eigen::Map<Eigen::MatrixXd> om(out.data(), nx, ny);
  // (A_y (x) M_x + M_y (x) A_x) vec(U) = vec(M_x U A_y^T + A_x U M_y^T); the 1D matrices are symmetric
  const Eigen::MatrixXd ut = um.transpose();
  om = s.mass_1d(0) * (s.stiffness_1d(1) * ut).transpose() + s.stiffness_1d(0) * (s.mass_1d(1) * ut).transpose();
  return out;
}

Eigen::VectorXd DirichletSolver::boundary_values(const ScalarField& g) const {
  const auto bd = space_->boundary_dofs();
  Eigen::VectorXd v(bd.size());
  for (std::size_t i = 0; i < bd.size(); ++i) v[i] = g(space_->node(bd[i]));
  return v;
}

FEFunction DirichletSolver::solve(const Eigen::VectorXd& load, const Eigen::VectorXd& boundary_values) const {
  const FESpace& s = *space_;
  const auto bd = s.boundary_dofs();
  if (load.size() != s.n_dofs()) throw InvalidArgument("DirichletSolver: load vector has the wrong length");
  if (boundary_values.size() != static_cast<Eigen::Index>(bd.size())) {
    throw InvalidArgument("DirichletSolver: boundary data has the wrong length");
  }
  FEFunction u{space_, Eigen::VectorXd::Zero(s.n_dofs())};
  for (std::size_t i = 0; i < bd.size(); ++i) u.values[bd[i]] = boundary_values[i];
  const Eigen::VectorXd r = load - apply_stiffness(u.values);
  const auto& interior = impl_->interior;

  if (backend_ == FeBackend::Tensor) {
    const int nx = s.nodes_x() - 2, ny = s.nodes_y() - 2;
    Eigen::MatrixXd ri(nx, ny);
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) ri(ix, iy) = r[s.index(ix + 1, iy + 1)];
    }
    Eigen::MatrixXd w = impl_->vx.transpose() * ri * impl_->vy;
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) w(ix, iy) /= impl_->lx[ix] + impl_->ly[iy];
    }
    const Eigen::MatrixXd ui = impl_->vx * w * impl_->vy.transpose();
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) u.values[s.index(ix + 1, iy + 1)] = ui(ix, iy);
    }
    return u;
  }

  Eigen::VectorXd ri(interior.size());
  for (std::size_t i = 0; i < interior.size(); ++i) ri[i] = r[interior[i]];
  Eigen::VectorXd xi;
  if (backend_ == FeBackend::Direct) {
    xi = impl_->chol.solve(ri);
  } else {
    const SolveResult res = pcg(impl_->kii, ri, *impl_->sgs, pcg_);
    inner_iterations_ += res.report.iterations;
    if (!res.report.converged) {
      throw SolverError("DirichletSolver: CG did not converge (relative residual " +
                        std::to_string(res.report.relative_residual) + ")");
    }
    xi = res.x;
  }
  for (std::size_t i = 0; i < interior.size(); ++i) u.values[interior[i]] = xi[i];
  return u;
}

FEFunction DirichletSolver::solve(const ScalarField& f, const ScalarField& g) const {
  return solve(assemble_load(*space_, f), boundary_values(g));
}

FEFunction solve_dirichlet(std::shared_ptr<const FESpace> space, const ScalarField& f, const ScalarField& g,
                           FeBackend backend) {
  return DirichletSolver(std::move(space), backend).solve(f, g);
}

namespace {

struct LocalBasis {
  int base_x, base_y;
  std::vector<double> vx, vy, dx, dy;
};

LocalBasis local_basis(const FESpace& s, const Point& x) {
  const int p = s.degree();
  LocalBasis lb;
  int ex, ey;
  double xi, eta;
  s.locate(x, ex, ey, xi, eta);
  lb.base_x = ex * p;
  lb.base_y = ey * p;
  lb.vx.resize(p + 1);
  lb.vy.resize(p + 1);
  lb.dx.resize(p + 1);
  lb.dy.resize(p + 1);
  quadrature::lagrange_derivatives(s.reference_nodes(), xi, lb.vx, lb.dx);
  quadrature::lagrange_derivatives(s.reference_nodes(), eta, lb.vy, lb.dy);
  const double inv_h = 1.0 / s.mesh().h();
  for (int a = 0; a <= p; ++a) {
    lb.dx[a] *= inv_h;
    lb.dy[a] *= inv_h;
  }
  return lb;
}

void check_function(const FEFunction& u) {
  if (!u.space) throw InvalidArgument("FEFunction without a space");
  if (u.values.size() != u.space->n_dofs()) throw InvalidArgument("FEFunction has the wrong length");
}

}  // namespace

std::vector<double> eval_fe(const FEFunction& u, std::span<const Point> points) {
  check_function(u);
  const FESpace& s = *u.space;
  const int p = s.degree();
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const LocalBasis lb = local_basis(s, points[i]);
    double v = 0.0;
    for (int b = 0; b <= p; ++b) {
      for (int a = 0; a <= p; ++a) v += lb.vx[a] * lb.vy[b] * u.values[s.index(lb.base_x + a, lb.base_y + b)];
    }
    out[i] = v;
  }
  return out;
}

std::vector<Point> eval_fe_grad(const FEFunction& u, std::span<const Point> points) {
  check_function(u);
  const FESpace& s = *u.space;
  const int p = s.degree();
  std::vector<Point> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const LocalBasis lb = local_basis(s, points[i]);
    Point g = Point::Zero();
    for (int b = 0; b <= p; ++b) {
      for (int a = 0; a <= p; ++a) {
        const double c = u.values[s.index(lb.base_x + a, lb.base_y + b)];
        g.x() += lb.dx[a] * lb.vy[b] * c;
        g.y() += lb.vx[a] * lb.dy[b] * c;
      }
    }
    out[i] = g;
  }
  return out;
}

SparseMatrix evaluation_matrix(const FESpace& space, std::span<const Point> points) {
  const int p = space.degree();
  Triplets t;
  t.reserve(points.size() * (p + 1) * (p + 1));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const LocalBasis lb = local_basis(space, points[i]);
    for (int b = 0; b <= p; ++b) {
      for (int a = 0; a <= p; ++a) {
        t.emplace_back(static_cast<int>(i), space.index(lb.base_x + a, lb.base_y + b), lb.vx[a] * lb.vy[b]);
      }
    }
  }
  SparseMatrix m(static_cast<Eigen::Index>(points.size()), space.n_dofs());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix normal_derivative_matrix(const FESpace& space, std::span<const Point> points,
                                      std::span<const Point> normals) {
  if (normals.size() != points.size()) throw InvalidArgument("normal_derivative_matrix: one normal per point");
  const int p = space.degree();
  Triplets t;
  t.reserve(points.size() * (p + 1) * (p + 1));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const LocalBasis lb = local_basis(space, points[i]);
    const Point& n = normals[i];
    for (int b = 0; b <= p; ++b) {
      for (int a = 0; a <= p; ++a) {
        const double v = n.x() * lb.dx[a] * lb.vy[b] + n.y() * lb.vx[a] * lb.dy[b];
        t.emplace_back(static_cast<int>(i), space.index(lb.base_x + a, lb.base_y + b), v);
      }
    }
  }
  SparseMatrix m(static_cast<Eigen::Index>(points.size()), space.n_dofs());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace feie

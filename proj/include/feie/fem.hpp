#pragma once

#include <atomic>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "feie/common.hpp"
#include "feie/solvers.hpp"

namespace feie {

/// Uniform grid of square elements on a rectangle.
class FEMesh {
 public:
  FEMesh(const Rect& box, int nx, int ny);

  /// Element count per axis is width / h rounded; the element must come out square.
  static FEMesh uniform(const Rect& box, double h);

  const Rect& box() const { return box_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  int element_count() const { return nx_ * ny_; }

 private:
  Rect box_;
  int nx_;
  int ny_;
  double h_;
};

/// Continuous Q_p space on an FEMesh with Gauss-Lobatto nodes in each element.
///
/// Global nodes form a tensor grid; node (ix, iy) has index iy * nodes_x() + ix.
class FESpace {
 public:
  FESpace(const FEMesh& mesh, int degree);

  const FEMesh& mesh() const { return mesh_; }
  int degree() const { return p_; }
  int nodes_x() const { return static_cast<int>(xs_.size()); }
  int nodes_y() const { return static_cast<int>(ys_.size()); }
  int n_dofs() const { return nodes_x() * nodes_y(); }
  int index(int ix, int iy) const { return iy * nodes_x() + ix; }

  std::span<const double> x_coordinates() const { return xs_; }
  std::span<const double> y_coordinates() const { return ys_; }
  Point node(int i) const { return {xs_[i % nodes_x()], ys_[i / nodes_x()]}; }

  /// Gauss-Lobatto points on [0, 1] used inside every element.
  std::span<const double> reference_nodes() const { return ref_; }

  std::span<const int> boundary_dofs() const { return boundary_; }
  bool is_boundary(int i) const;

  /// Element containing x and the local coordinates in [0, 1]^2. Points on an
  /// element edge go to the element on the lower-left. Throws InvalidArgument
  /// for points outside the rectangle.
  void locate(const Point& x, int& ex, int& ey, double& xi, double& eta) const;

  /// 1D stiffness and mass matrices along x (or y) over all nodes of that axis.
  const SparseMatrix& stiffness_1d(int axis) const { return axis == 0 ? ax_ : ay_; }
  const SparseMatrix& mass_1d(int axis) const { return axis == 0 ? mx_ : my_; }

 private:
  FEMesh mesh_;
  int p_;
  std::vector<double> ref_;
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<int> boundary_;
  SparseMatrix ax_, mx_, ay_, my_;
};

/// Coefficient vector over a space; nodal values since the basis is Lagrange.
struct FEFunction {
  std::shared_ptr<const FESpace> space;
  Eigen::VectorXd values;
};

/// Global stiffness matrix of the unconstrained space.
SparseMatrix assemble_stiffness(const FESpace& space);
SparseMatrix assemble_mass(const FESpace& space);

/// Load vector int f phi_i with (p+2)^2 Gauss points per element.
Eigen::VectorXd assemble_load(const FESpace& space, const ScalarField& f);

/// Nodal interpolation of g at the boundary nodes, zero inside.
FEFunction lift(std::shared_ptr<const FESpace> space, const ScalarField& g);

enum class FeBackend {
  Tensor,    ///< fast diagonalization of the separable stiffness (exact direct solve)
  Direct,    ///< sparse Cholesky (AMD ordering) of the constrained stiffness
  Iterative  ///< conjugate gradients with symmetric Gauss-Seidel
};

/// Dirichlet solver for one space, factored once and reused.
class DirichletSolver {
 public:
  explicit DirichletSolver(std::shared_ptr<const FESpace> space, FeBackend backend = FeBackend::Tensor,
                           PcgOptions pcg = {});
  ~DirichletSolver();
  DirichletSolver(const DirichletSolver&) = delete;
  DirichletSolver& operator=(const DirichletSolver&) = delete;

  const std::shared_ptr<const FESpace>& space() const { return space_; }
  FeBackend backend() const { return backend_; }

  /// Galerkin solution with load vector `load` (full length) and boundary values
  /// listed in boundary_dofs() order.
  FEFunction solve(const Eigen::VectorXd& load, const Eigen::VectorXd& boundary_values) const;
  FEFunction solve(const ScalarField& f, const ScalarField& g) const;

  /// Boundary values of g in boundary_dofs() order.
  Eigen::VectorXd boundary_values(const ScalarField& g) const;

  /// Cumulative CG iterations (iterative backend only).
  long inner_iterations() const { return inner_iterations_.load(); }

  /// Applies the full stiffness matrix to nodal values.
  Eigen::VectorXd apply_stiffness(const Eigen::VectorXd& u) const;

 private:
  struct Impl;
  std::shared_ptr<const FESpace> space_;
  FeBackend backend_;
  PcgOptions pcg_;
  std::unique_ptr<Impl> impl_;
  mutable std::atomic<long> inner_iterations_{0};
};

/// One-shot Dirichlet solve: -Laplace u = f in the rectangle, u = g on its boundary.
FEFunction solve_dirichlet(std::shared_ptr<const FESpace> space, const ScalarField& f,
                           const ScalarField& g, FeBackend backend = FeBackend::Tensor);

std::vector<double> eval_fe(const FEFunction& u, std::span<const Point> points);
std::vector<Point> eval_fe_grad(const FEFunction& u, std::span<const Point> points);

/// Rows map nodal values to point values.
SparseMatrix evaluation_matrix(const FESpace& space, std::span<const Point> points);
/// Rows map nodal values to n . grad u at the points.
SparseMatrix normal_derivative_matrix(const FESpace& space, std::span<const Point> points,
                                      std::span<const Point> normals);

}  // namespace feie

#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "feie/common.hpp"

namespace feie {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Square operator given by its action. `apply(x, y)` must overwrite y with A x.
struct LinearOperator {
  int dim = 0;
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> apply;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(dim);
    apply(x, y);
    return y;
  }

  static LinearOperator from_matrix(const Eigen::MatrixXd& m);
};

struct SolveReport {
  int iterations = 0;
  /// Work done inside the operator (e.g. CG iterations of nested FE solves).
  long inner_iterations = 0;
  /// ||b - A x|| / ||b||, recomputed from the returned x.
  double relative_residual = 0.0;
  bool converged = false;
  double wall_seconds = 0.0;
  /// Relative residual estimate after each iteration (GMRES: the Arnoldi estimate).
  std::vector<double> residual_history;
};

struct SolveResult {
  Eigen::VectorXd x;
  SolveReport report;
};

struct GmresOptions {
  int restart = 20;
  double tol = 1e-10;
  int max_iters = 1000;
};

/// Restarted GMRES with modified Gram-Schmidt and Givens rotations, zero initial guess.
/// Non-convergence is reported through report.converged; a breakdown that does
/// not coincide with convergence throws SolverError.
SolveResult gmres(const LinearOperator& op, const Eigen::VectorXd& rhs, const GmresOptions& opts = {});

/// LU with partial pivoting. Throws SolverError naming the pivot when the
/// matrix is singular to working precision.
Eigen::VectorXd dense_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs);

class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  /// z = M^{-1} r
  virtual void apply(const Eigen::VectorXd& r, Eigen::VectorXd& z) const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
 public:
  void apply(const Eigen::VectorXd& r, Eigen::VectorXd& z) const override { z = r; }
};

/// Symmetric Gauss-Seidel: M = (D + L) D^{-1} (D + U).
class SymmetricGaussSeidel final : public Preconditioner {
 public:
  explicit SymmetricGaussSeidel(const SparseMatrix& a);
  void apply(const Eigen::VectorXd& r, Eigen::VectorXd& z) const override;

 private:
  Eigen::SparseMatrix<double, Eigen::RowMajor> a_;
  Eigen::VectorXd diag_;
};

struct PcgOptions {
  double tol = 1e-12;
  int max_iters = 20000;
};

/// Preconditioned conjugate gradients for a symmetric positive definite matrix.
/// x0, when non-empty, is the initial guess.
SolveResult pcg(const SparseMatrix& a, const Eigen::VectorXd& rhs, const Preconditioner& precond,
                const PcgOptions& opts = {}, const Eigen::VectorXd& x0 = {});

}  // namespace feie

#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "feie/fem.hpp"
#include "feie/geometry.hpp"
#include "feie/potentials.hpp"
#include "feie/solvers.hpp"

namespace feie {

/// Boundary data that may depend on the unit normal n at x (out of Omega^i).
using BoundaryField = std::function<double(const Point& x, const Point& n)>;

/// -Laplace u = f in Omega, u = g on Gamma; Omega embedded in `box`.
struct InteriorProblem {
  std::shared_ptr<const Curve> curve;
  Rect box;
  ScalarField f;  ///< must be defined on the whole box
  ScalarField g;
};

/// -Laplace u = f in box \ Omega, u = g on Gamma, u = g_outer on the box boundary.
struct ExclusionProblem {
  std::shared_ptr<const Curve> curve;
  Rect box;
  ScalarField f;  ///< smooth continuation into Omega required
  ScalarField g;
  ScalarField g_outer;
};

/// -Laplace u^i = f_in in Omega^i, -Laplace u^e = f_out in Omega^e = outer_box \ Omega^i,
/// u^i = c u^e + a and du^i/dn = kappa du^e/dn + b on Gamma (n points out of Omega^i),
/// u^e = g_outer on the outer box boundary.
struct InterfaceProblem {
  std::shared_ptr<const Curve> curve;
  Rect inner_box;
  Rect outer_box;
  ScalarField f_in;
  ScalarField f_out;  ///< continued smoothly over the whole outer box
  double kappa = 1.0;
  double c = 1.0;
  ScalarField a;
  BoundaryField b;
  ScalarField g_outer;
};

/// u^i = u1^i + alpha1 D gamma^i + alpha2 S gamma^e, u^e = u1^e + alpha3 D gamma^i + alpha4 S gamma^e.
struct InterfaceCoefficients {
  enum class Case { General, KappaEqualsC };
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double alpha3 = 0.0;
  double alpha4 = 0.0;
  Case which = Case::General;
};

/// Coefficients that remove the hypersingular operator (alpha1 = kappa alpha3) and
/// keep the gamma^e equation of the second kind. Throws UnsupportedCaseError for
/// kappa = -c and InvalidArgument for kappa = 0.
InterfaceCoefficients select_alphas(double kappa, double c);

enum class ProblemKind { Interior, Exclusion, Interface };

enum class SolveMode {
  MatrixFree,  ///< GMRES on the operator action
  Assembled    ///< apply the operator to every unit vector, then dense LU
};

struct CoupledSettings {
  int degree = 2;
  double h_fe = 0.04;
  QbxConfig qbx;
  FeBackend backend = FeBackend::Tensor;
  SolveMode mode = SolveMode::MatrixFree;
  GmresOptions gmres;
};

/// Densities and FE parts of a solved problem plus a point evaluator.
struct CoupledSolution {
  ProblemKind kind = ProblemKind::Interior;
  std::shared_ptr<const LayerPotentials> potentials;
  Eigen::VectorXd gamma;      ///< gamma (interior, exclusion) or gamma^i (interface)
  Eigen::VectorXd gamma_out;  ///< gamma^e (interface only)
  FEFunction u1;              ///< u1 (interior, exclusion) or u1^i (interface)
  FEFunction u1_out;          ///< u1^e (interface only)
  InterfaceCoefficients alphas;
  SolveReport report;

  const BoundaryDiscretization& discretization() const { return potentials->discretization(); }

  /// Whether x belongs to the computational domain (region classification by
  /// the interior of Gamma for interface problems).
  bool contains(const Point& x) const;

  /// Total solution; near-boundary points use QBX on the side they lie on.
  /// Throws InvalidArgument for points outside the computational domain.
  std::vector<double> evaluate(std::span<const Point> points) const;

  /// One-sided limits at points on Gamma.
  std::vector<double> evaluate_side(std::span<const Point> points, Side side) const;
};

/// Nystrom system (-1/2 I + Dbar) gamma = g - R u1.
class InteriorSystem {
 public:
  InteriorSystem(const InteriorProblem& prob, const BoundaryDiscretization& disc, const CoupledSettings& settings);

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const Eigen::VectorXd& rhs() const { return rhs_; }
  CoupledSolution solve() const;

 private:
  CoupledSettings settings_;
  std::shared_ptr<const LayerPotentials> lp_;
  FEFunction u1_;
  Eigen::MatrixXd matrix_;
  Eigen::VectorXd rhs_;
};

/// Schur system (1/2 I + Abar - R U[0; Rhat A]) gamma = g - R U[f; g_outer], A = D + S.
class ExclusionSystem {
 public:
  ExclusionSystem(const ExclusionProblem& prob, const BoundaryDiscretization& disc, const CoupledSettings& settings);

  int dim() const { return static_cast<int>(rhs_.size()); }
  LinearOperator op() const;
  const Eigen::VectorXd& rhs() const { return rhs_; }
  /// Columns are the operator applied to unit vectors.
  Eigen::MatrixXd assemble() const;
  /// The compact part Abar - R U[0; Rhat A] of the operator.
  Eigen::MatrixXd assemble_compact_part() const;
  CoupledSolution solve() const;
  /// FE part and evaluator for a given density.
  CoupledSolution finish(const Eigen::VectorXd& gamma, const SolveReport& report) const;
  long inner_iterations() const { return solver_->inner_iterations(); }

 private:
  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;

  CoupledSettings settings_;
  std::shared_ptr<const LayerPotentials> lp_;
  std::shared_ptr<const FESpace> space_;
  std::shared_ptr<DirichletSolver> solver_;
  Eigen::MatrixXd ie_;          // 1/2 I + Dbar + Sbar
  Eigen::MatrixXd outer_;       // D + S at the box boundary nodes
  SparseMatrix trace_;          // FE values at Gamma nodes
  Eigen::VectorXd load_;
  Eigen::VectorXd zero_load_;
  Eigen::VectorXd g_outer_;
  Eigen::VectorXd rhs_;
};

/// Block system for (gamma^i, gamma^e); see InterfaceCoefficients for the representation.
class InterfaceSystem {
 public:
  InterfaceSystem(const InterfaceProblem& prob, const BoundaryDiscretization& disc, const CoupledSettings& settings);

  int dim() const { return static_cast<int>(rhs_.size()); }
  LinearOperator op() const;
  const Eigen::VectorXd& rhs() const { return rhs_; }
  Eigen::MatrixXd assemble() const;
  const InterfaceCoefficients& alphas() const { return alphas_; }
  CoupledSolution solve() const;
  CoupledSolution finish(const Eigen::VectorXd& gamma, const SolveReport& report) const;
  long inner_iterations() const { return solver_out_->inner_iterations() + solver_in_->inner_iterations(); }

 private:
  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;

  CoupledSettings settings_;
  InterfaceCoefficients alphas_;
  double kappa_;
  double c_;
  std::shared_ptr<const LayerPotentials> lp_;
  std::shared_ptr<const FESpace> space_in_;
  std::shared_ptr<const FESpace> space_out_;
  std::shared_ptr<DirichletSolver> solver_in_;
  std::shared_ptr<DirichletSolver> solver_out_;
  Eigen::MatrixXd ie_;     // block integral-equation part, 2N x 2N
  Eigen::MatrixXd outer_;  // [alpha3 D, alpha4 S] at the outer box boundary nodes
  SparseMatrix trace_out_, dn_out_;
  FEFunction u0_in_;
  Eigen::VectorXd load_out_;
  Eigen::VectorXd zero_load_;
  Eigen::VectorXd g_outer_;
  Eigen::VectorXd rhs_;
};

CoupledSolution solve_interior(const InteriorProblem& prob, const BoundaryDiscretization& disc,
                               const CoupledSettings& settings = {});
CoupledSolution solve_exclusion(const ExclusionProblem& prob, const BoundaryDiscretization& disc,
                                const CoupledSettings& settings = {});
CoupledSolution solve_interface(const InterfaceProblem& prob, const BoundaryDiscretization& disc,
                                const CoupledSettings& settings = {});

/// Residuals of the interface conditions for manufactured data at the nodes.
struct JumpCheck {
  double value = 0.0;          ///< max |u^i - c u^e - a|
  double flux_shared = 0.0;    ///< max |du^i/dn - kappa du^e/dn - b|, one normal out of Omega^i
  double flux_opposite = 0.0;  ///< same with du^e/dn taken along the normal out of Omega^e
};

JumpCheck check_jumps(const InterfaceProblem& prob, const BoundaryDiscretization& disc, const ScalarField& u_in,
                      const VectorField& grad_in, const ScalarField& u_out, const VectorField& grad_out);

/// Max over points of |-Laplace u - f| with a fourth-order central difference of step h.
double pde_residual(const ScalarField& u, const ScalarField& f, std::span<const Point> points, double h = 1e-3);

}  // namespace feie

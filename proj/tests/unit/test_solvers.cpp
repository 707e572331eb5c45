#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "feie/fem.hpp"
#include "feie/potentials.hpp"
#include "feie/solvers.hpp"

using namespace feie;

namespace {

Eigen::VectorXd random_vector(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

Eigen::MatrixXd nonsymmetric_test_matrix(int n) {
  // diagonally shifted random matrix with a spread spectrum
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  std::mt19937 rng(11);
  std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  a.diagonal().array() += 2.0;
  return a;
}

Eigen::MatrixXd nystrom_interior(int panels) {
  const LayerPotentials lp(build_panels(circle({0, 0}, 1.0), panels, 8));
  Eigen::MatrixXd m = lp.onsurface_matrix(LayerKind::Double, Side::PrincipalValue);
  m.diagonal().array() -= 0.5;
  return m;
}

SparseMatrix constrained_q1_stiffness(int n) {
  const FESpace space(FEMesh(Rect{0.0, 1.0, 0.0, 1.0}, n, n), 1);
  const Eigen::MatrixXd k = assemble_stiffness(space);
  std::vector<int> inner;
  for (int i = 0; i < space.n_dofs(); ++i)
    if (!space.is_boundary(i)) inner.push_back(i);
  return Eigen::MatrixXd(k(inner, inner)).sparseView();
}

}  // namespace

TEST(Gmres, IdentityConvergesInOneIteration) {
  const Eigen::VectorXd b = random_vector(7, 1);
  const SolveResult r = gmres(LinearOperator::from_matrix(Eigen::MatrixXd::Identity(7, 7)), b);
  EXPECT_EQ(r.report.iterations, 1);
  EXPECT_TRUE(r.report.converged);
  EXPECT_LT((r.x - b).norm(), 1e-14);
}

TEST(Gmres, DiagonalSystem) {
  const Eigen::Vector3d d(1, 2, 4);
  GmresOptions o;
  o.tol = 1e-12;
  const SolveResult r = gmres(LinearOperator::from_matrix(d.asDiagonal().toDenseMatrix()), d, o);
  EXPECT_TRUE(r.report.converged);
  EXPECT_LT((r.x - Eigen::Vector3d::Ones()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(r.report.iterations, 3);
}

TEST(Gmres, BreakdownWithoutConvergenceIsReported) {
  // A b = 0 exhausts the Krylov space while the residual is still b
  try {
    gmres(LinearOperator::from_matrix(Eigen::MatrixXd::Zero(2, 2)), Eigen::Vector2d(1.0, 0.0));
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration"), std::string::npos);
  }
}

TEST(Gmres, NonConvergenceIsFlaggedNotThrown) {
  GmresOptions o;
  o.restart = 2;
  o.max_iters = 3;
  o.tol = 1e-14;
  const SolveResult r = gmres(LinearOperator::from_matrix(nonsymmetric_test_matrix(40)), random_vector(40, 2), o);
  EXPECT_FALSE(r.report.converged);
  EXPECT_EQ(r.report.iterations, 3);
}

TEST(Gmres, RejectsBadArguments) {
  const auto op = LinearOperator::from_matrix(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_THROW(gmres(op, Eigen::VectorXd::Ones(4)), InvalidArgument);
  GmresOptions o;
  o.restart = 0;
  EXPECT_THROW(gmres(op, Eigen::VectorXd::Ones(3), o), InvalidArgument);
}

TEST(Gmres, NystromIterationsIndependentOfResolution) {
  int its[2];
  int k = 0;
  for (int panels : {16, 32}) {
    const auto disc = build_panels(circle({0, 0}, 1.0), panels, 8);
    Eigen::VectorXd b(disc.size());
    for (int i = 0; i < disc.size(); ++i) b[i] = std::exp(disc.node(i).x()) + disc.node(i).y();
    const SolveResult r = gmres(LinearOperator::from_matrix(nystrom_interior(panels)), b);
    EXPECT_TRUE(r.report.converged);
    its[k++] = r.report.iterations;
  }
  EXPECT_LE(std::abs(its[1] - its[0]), 2) << its[0] << " vs " << its[1];
}

TEST(Gmres, ResidualMonotoneWithinEachCycle) {
  GmresOptions o;
  o.restart = 5;
  o.tol = 1e-12;
  const SolveResult r = gmres(LinearOperator::from_matrix(nonsymmetric_test_matrix(60)), random_vector(60, 3), o);
  ASSERT_TRUE(r.report.converged);
  const auto& h = r.report.residual_history;
  ASSERT_EQ(static_cast<int>(h.size()), r.report.iterations);
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (i % o.restart != 0) EXPECT_LE(h[i], h[i - 1] * (1 + 1e-12)) << "iteration " << i + 1;
  }
}

TEST(Gmres, ReportedResidualMatchesRecomputed) {
  for (double tol : {1e-4, 1e-8, 1e-11}) {
    GmresOptions o;
    o.tol = tol;
    const Eigen::MatrixXd a = nonsymmetric_test_matrix(50);
    const Eigen::VectorXd b = random_vector(50, 4);
    const SolveResult r = gmres(LinearOperator::from_matrix(a), b, o);
    const double actual = (b - a * r.x).norm() / b.norm();
    EXPECT_NEAR(r.report.relative_residual, actual, 0.1 * actual);
    EXPECT_LE(actual, tol * 1.1);
    EXPECT_NEAR(r.report.residual_history.back(), actual, 0.1 * actual);
  }
}

TEST(Gmres, SolutionIsLinearInRhs) {
  const Eigen::MatrixXd a = nonsymmetric_test_matrix(30);
  const auto op = LinearOperator::from_matrix(a);
  GmresOptions o;
  o.tol = 1e-14;
  const Eigen::VectorXd b1 = random_vector(30, 5), b2 = random_vector(30, 6);
  const Eigen::VectorXd x = gmres(op, 2.0 * b1 - 3.0 * b2, o).x;
  const Eigen::VectorXd y = 2.0 * gmres(op, b1, o).x - 3.0 * gmres(op, b2, o).x;
  EXPECT_LT((x - y).norm() / y.norm(), 1e-10);
}

TEST(LinearOperator, FromMatrixIsLinear) {
  const Eigen::MatrixXd a = nonsymmetric_test_matrix(25);
  const auto op = LinearOperator::from_matrix(a);
  const Eigen::VectorXd x = random_vector(25, 7), y = random_vector(25, 8);
  const Eigen::VectorXd lhs = op(0.7 * x - 1.3 * y);
  const Eigen::VectorXd rhs = 0.7 * op(x) - 1.3 * op(y);
  EXPECT_LT((lhs - rhs).norm() / rhs.norm(), 1e-10);
  EXPECT_THROW(LinearOperator::from_matrix(Eigen::MatrixXd::Zero(2, 3)), InvalidArgument);
}

TEST(DenseSolve, IdentityAndTwoByTwo) {
  const Eigen::VectorXd b = random_vector(5, 9);
  EXPECT_LT((dense_solve(Eigen::MatrixXd::Identity(5, 5), b) - b).norm(), 1e-15);
  Eigen::Matrix2d a;
  a << 2, 1, 1, 3;
  const Eigen::VectorXd x = dense_solve(a, Eigen::Vector2d(3, 4));
  EXPECT_NEAR(x[0], 1.0, 1e-14);
  EXPECT_NEAR(x[1], 1.0, 1e-14);
}

TEST(DenseSolve, NystromConstantRhsGivesNegatedDensity) {
  const Eigen::MatrixXd m = nystrom_interior(16);
  const double c = 2.5;
  const Eigen::VectorXd x = dense_solve(m, Eigen::VectorXd::Constant(m.rows(), c));
  EXPECT_LT((x.array() + c).abs().maxCoeff(), 1e-6);
}

TEST(DenseSolve, ResidualSmallForWellConditioned) {
  const Eigen::MatrixXd a = nonsymmetric_test_matrix(80);
  const Eigen::VectorXd b = random_vector(80, 10);
  EXPECT_LE((b - a * dense_solve(a, b)).norm() / b.norm(), 1e-10);
}

TEST(DenseSolve, SingularMatrixNamesPivot) {
  Eigen::Matrix3d a;
  a << 1, 2, 3, 2, 4, 6, 0, 0, 1;
  try {
    dense_solve(a, Eigen::Vector3d(1, 2, 3));
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("pivot"), std::string::npos);
  }
}

TEST(Pcg, IdentityInOneIteration) {
  const SparseMatrix id = Eigen::MatrixXd::Identity(6, 6).sparseView();
  const SolveResult r = pcg(id, random_vector(6, 12), IdentityPreconditioner{});
  EXPECT_EQ(r.report.iterations, 1);
  EXPECT_TRUE(r.report.converged);
}

TEST(Pcg, TridiagonalLaplacian) {
  Eigen::Matrix4d t;
  t << 2, -1, 0, 0, -1, 2, -1, 0, 0, -1, 2, -1, 0, 0, -1, 2;
  const SparseMatrix a = Eigen::MatrixXd(t).sparseView();
  for (const Preconditioner* p :
       std::initializer_list<const Preconditioner*>{new IdentityPreconditioner, new SymmetricGaussSeidel(a)}) {
    const SolveResult r = pcg(a, Eigen::Vector4d(1, 0, 0, 1), *p);
    EXPECT_LT((r.x - Eigen::Vector4d::Ones()).cwiseAbs().maxCoeff(), 1e-12);
    delete p;
  }
}

TEST(Pcg, SymmetricGaussSeidelReducesIterations) {
  const SparseMatrix a = constrained_q1_stiffness(16);
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(a.rows());
  const SolveResult plain = pcg(a, b, IdentityPreconditioner{});
  const SolveResult sgs = pcg(a, b, SymmetricGaussSeidel(a));
  EXPECT_TRUE(plain.report.converged);
  EXPECT_TRUE(sgs.report.converged);
  EXPECT_LT(sgs.report.iterations, plain.report.iterations);
  EXPECT_LT((plain.x - sgs.x).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Pcg, InitialGuessAndIndefiniteDetection) {
  const SparseMatrix a = constrained_q1_stiffness(8);
  const Eigen::VectorXd b = random_vector(a.rows(), 13);
  const SolveResult first = pcg(a, b, IdentityPreconditioner{});
  const SolveResult warm = pcg(a, b, IdentityPreconditioner{}, {}, first.x);
  EXPECT_LE(warm.report.iterations, 1);
  SparseMatrix neg = -a;
  EXPECT_THROW(pcg(neg, b, IdentityPreconditioner{}), SolverError);
  EXPECT_THROW(SymmetricGaussSeidel{neg}, InvalidArgument);
}

TEST(Pcg, ReportedResidualMatchesRecomputed) {
  const SparseMatrix a = constrained_q1_stiffness(12);
  const Eigen::VectorXd b = random_vector(a.rows(), 14);
  PcgOptions o;
  o.tol = 1e-8;
  const SolveResult r = pcg(a, b, SymmetricGaussSeidel(a), o);
  const double actual = (b - a * r.x).norm() / b.norm();
  EXPECT_NEAR(r.report.relative_residual, actual, 0.1 * actual);
  EXPECT_LE(actual, 1.1e-8);
}

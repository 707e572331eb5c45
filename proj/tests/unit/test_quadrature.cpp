#include <gtest/gtest.h>

#include <cmath>

#include "feie/quadrature.hpp"

using namespace feie::quadrature;

TEST(Quadrature, GaussLegendreIntegratesMonomialsUpToDegree2nMinus1) {
  for (int n = 1; n <= 12; ++n) {
    const Rule r = gauss_legendre(n);
    ASSERT_EQ(r.size(), n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.points[i], k);
      EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << "n=" << n << " k=" << k;
    }
  }
}

TEST(Quadrature, GaussLobattoIncludesEndpointsAndIsExactToDegree2nMinus3) {
  for (int n = 2; n <= 8; ++n) {
    const Rule r = gauss_lobatto(n);
    EXPECT_DOUBLE_EQ(r.points.front(), 0.0);
    EXPECT_DOUBLE_EQ(r.points.back(), 1.0);
    for (int k = 0; k <= 2 * n - 3; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.points[i], k);
      EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << "n=" << n << " k=" << k;
    }
  }
}

TEST(Quadrature, LagrangeBasisIsCardinalAndReproducesPolynomials) {
  const Rule r = gauss_lobatto(5);
  std::vector<double> v(5), d(5);
  for (int j = 0; j < 5; ++j) {
    lagrange_values(r.points, r.points[j], v);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(v[i], i == j ? 1.0 : 0.0, 1e-14);
  }
  // x^3 and its derivative at an off-node point
  const double x = 0.37;
  lagrange_derivatives(r.points, x, v, d);
  double f = 0.0, df = 0.0;
  for (int i = 0; i < 5; ++i) {
    f += v[i] * std::pow(r.points[i], 3);
    df += d[i] * std::pow(r.points[i], 3);
  }
  EXPECT_NEAR(f, x * x * x, 1e-14);
  EXPECT_NEAR(df, 3 * x * x, 1e-13);
}

TEST(Quadrature, InterpolationMatrixRowsSumToOne) {
  const Rule a = gauss_legendre(6), b = gauss_legendre(11);
  const Eigen::MatrixXd m = interpolation_matrix(a.points, b.points);
  ASSERT_EQ(m.rows(), 11);
  ASSERT_EQ(m.cols(), 6);
  for (int i = 0; i < 11; ++i) EXPECT_NEAR(m.row(i).sum(), 1.0, 1e-13);
}

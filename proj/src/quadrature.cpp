#include "feie/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "feie/common.hpp"

namespace feie::quadrature {

namespace {

// Legendre P_n and its derivative at x in [-1, 1].
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

Rule gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: need at least one point");
  Rule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      legendre(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(n, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // x is the i-th largest root; store ascending on [0, 1]
    rule.points[n - 1 - i] = 0.5 * (1.0 + x);
    rule.points[i] = 0.5 * (1.0 - x);
    rule.weights[n - 1 - i] = 0.5 * w;
    rule.weights[i] = 0.5 * w;
  }
  return rule;
}

Rule gauss_lobatto(int n) {
  if (n < 2) throw InvalidArgument("gauss_lobatto: need at least two points");
  const int m = n - 1;
  Rule rule;
  rule.points.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  // interior nodes are the roots of P'_m; Chebyshev-Gauss-Lobatto initial guess
  for (int i = 0; i < n; ++i) {
    double x = -std::cos(std::numbers::pi * i / m);
    if (i > 0 && i < m) {
      for (int it = 0; it < 100; ++it) {
        double p = 0.0, dp = 0.0;
        legendre(m, x, p, dp);
        // (1-x^2) P'' = 2x P' - m(m+1) P
        const double d2p = (2.0 * x * dp - m * (m + 1) * p) / (1.0 - x * x);
        const double dx = dp / d2p;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
    }
    double p = 0.0, dp = 0.0;
    if (i == 0 || i == m) {
      p = (i == 0 && m % 2 == 1) ? -1.0 : 1.0;
    } else {
      legendre(m, x, p, dp);
    }
    rule.points[i] = 0.5 * (1.0 + x);
    rule.weights[i] = 0.5 * 2.0 / (m * (m + 1) * p * p);
  }
  rule.points.front() = 0.0;
  rule.points.back() = 1.0;
  return rule;
}

void lagrange_values(std::span<const double> nodes, double x, std::span<double> out) {
  const std::size_t n = nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    double v = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) v *= (x - nodes[j]) / (nodes[i] - nodes[j]);
    }
    out[i] = v;
  }
}

void lagrange_derivatives(std::span<const double> nodes, double x, std::span<double> values,
                          std::span<double> derivs) {
  const std::size_t n = nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    double v = 1.0;
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double denom = nodes[i] - nodes[j];
      // product rule: d(v * (x - x_j)/denom)
      d = d * (x - nodes[j]) / denom + v / denom;
      v *= (x - nodes[j]) / denom;
    }
    values[i] = v;
    derivs[i] = d;
  }
}

Eigen::MatrixXd interpolation_matrix(std::span<const double> from, std::span<const double> to) {
  Eigen::MatrixXd m(to.size(), from.size());
  std::vector<double> row(from.size());
  for (std::size_t r = 0; r < to.size(); ++r) {
    lagrange_values(from, to[r], row);
    for (std::size_t c = 0; c < from.size(); ++c) m(r, c) = row[c];
  }
  return m;
}

}  // namespace feie::quadrature

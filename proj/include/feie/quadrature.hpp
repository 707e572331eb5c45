#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace feie::quadrature {

/// One-dimensional rule on the reference interval [0, 1].
struct Rule {
  std::vector<double> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }
};

/// n-point Gauss-Legendre rule on [0, 1]; exact for polynomials of degree 2n-1.
Rule gauss_legendre(int n);

/// n-point Gauss-Lobatto rule on [0, 1] (n >= 2), endpoints included.
Rule gauss_lobatto(int n);

/// Values of the Lagrange basis on `nodes` at `x`.
void lagrange_values(std::span<const double> nodes, double x, std::span<double> out);

/// Values and first derivatives of the Lagrange basis on `nodes` at `x`.
void lagrange_derivatives(std::span<const double> nodes, double x, std::span<double> values,
                          std::span<double> derivs);

/// Matrix mapping nodal values on `from` to values at points `to`.
Eigen::MatrixXd interpolation_matrix(std::span<const double> from, std::span<const double> to);

}  // namespace feie::quadrature

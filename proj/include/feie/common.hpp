#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace feie {

using Point = Eigen::Vector2d;
using PointList = std::vector<Point>;
using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

/// Axis-aligned rectangle [x_min, x_max] x [y_min, y_max].
struct Rect {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }

  bool contains(const Point& p, double tol = 0.0) const {
    return p.x() >= x_min - tol && p.x() <= x_max + tol && p.y() >= y_min - tol &&
           p.y() <= y_max + tol;
  }

  /// Distance from an interior point to the rectangle boundary.
  double boundary_distance(const Point& p) const;

  static Rect square(double half_width) { return {-half_width, half_width, -half_width, half_width}; }
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by caller-supplied data.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A direct-quadrature target lies inside the near-boundary band.
class NearBoundaryError : public Error {
 public:
  using Error::Error;
};

/// No admissible QBX expansion center could be placed.
class QbxGeometryError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver failure, breakdown, or a numerically singular system.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Interface coefficients outside the supported cases (kappa = -c).
class UnsupportedCaseError : public Error {
 public:
  using Error::Error;
};

/// Manufactured data failed a pre-solve consistency check.
class VerificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace feie

#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "feie/common.hpp"

namespace feie {

/// Smooth closed curve parametrized over t in [0, 1).
///
/// The normal always points out of the enclosed region: the orientation is
/// detected from the signed area at construction and the rotation direction of
/// the tangent is chosen accordingly.
class Curve {
 public:
  using PathFn = std::function<Point(double)>;

  Curve(PathFn position, PathFn first_derivative, PathFn second_derivative);

  Point position(double t) const { return position_(t); }
  Point derivative(double t) const { return first_(t); }
  Point second_derivative(double t) const { return second_(t); }
  double speed(double t) const { return first_(t).norm(); }

  /// Unit outward normal.
  Point normal(double t) const;

  bool counterclockwise() const { return counterclockwise_; }

  /// Arclength by composite Gauss-Legendre quadrature.
  double arclength(int panels = 64, int points = 20) const;

 private:
  PathFn position_;
  PathFn first_;
  PathFn second_;
  bool counterclockwise_ = true;
};

/// Counterclockwise circle; t = 0 at angle 0.
std::shared_ptr<const Curve> circle(const Point& center, double radius);

/// Five-armed starfish r(t) = 1/2 + (1/8) sin(10 pi t), centred at the origin.
std::shared_ptr<const Curve> starfish();

/// Composite Gauss-Legendre discretization of a curve over equal-parameter panels.
class BoundaryDiscretization {
 public:
  BoundaryDiscretization() = default;

  const Curve& curve() const { return *curve_; }
  const std::shared_ptr<const Curve>& curve_ptr() const { return curve_; }

  int panel_count() const { return n_panels_; }
  int nodes_per_panel() const { return q_; }
  int size() const { return static_cast<int>(nodes_.size()); }

  std::span<const Point> nodes() const { return nodes_; }
  std::span<const Point> normals() const { return normals_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> parameters() const { return params_; }

  const Point& node(int i) const { return nodes_[i]; }
  const Point& normal(int i) const { return normals_[i]; }
  double weight(int i) const { return weights_[i]; }
  double parameter(int i) const { return params_[i]; }
  int panel_of(int i) const { return i / q_; }

  double panel_length(int panel) const { return panel_lengths_[panel]; }
  /// Panel containing parameter t (periodic).
  int panel_at(double t) const;
  /// Mean node spacing on the panel owning node i.
  double node_spacing(int i) const { return panel_lengths_[panel_of(i)] / q_; }

  /// Characteristic size: the largest panel arclength.
  double h_ie() const { return h_ie_; }
  double total_weight() const;

  /// Reference Gauss-Legendre points on [0, 1] shared by every panel.
  std::span<const double> reference_points() const { return ref_points_; }

 private:
  friend BoundaryDiscretization build_panels(std::shared_ptr<const Curve>, int, int);

  std::shared_ptr<const Curve> curve_;
  int n_panels_ = 0;
  int q_ = 0;
  std::vector<double> ref_points_;
  std::vector<Point> nodes_;
  std::vector<Point> normals_;
  std::vector<double> weights_;
  std::vector<double> params_;
  std::vector<double> panel_lengths_;
  double h_ie_ = 0.0;
};

/// Panels of equal parameter length with q Gauss-Legendre nodes each.
/// Requires n_panels >= 4 and q >= 4.
BoundaryDiscretization build_panels(std::shared_ptr<const Curve> curve, int n_panels, int q);

enum class Region { Inside, Outside, NearBoundary };

/// Detailed location of a point relative to a discretized curve.
struct PointLocation {
  bool inside = false;
  bool near = false;
  double distance = 0.0;   ///< distance to the curve (exact closest point when near)
  double t_closest = 0.0;  ///< parameter of the closest curve point
  Point closest = Point::Zero();
  int nearest_node = 0;
};

/// Classifies x by a crossing-number test against the node polygon, refined by a
/// closest-point projection near the curve. "near" means distance below
/// near_factor times the local node spacing.
PointLocation locate(const BoundaryDiscretization& disc, const Point& x, double near_factor = 2.0);

Region point_in_domain(const BoundaryDiscretization& disc, const Point& x, double near_factor = 2.0);

/// Writes n samples "x y" per line, one closed loop (first point repeated last).
void write_curve_samples(const Curve& curve, int n, std::ostream& out);

}  // namespace feie

#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "feie/geometry.hpp"

namespace feie {

/// S: kernel G; D: normal derivative of G at the source; SingleNormalDeriv (S'):
/// normal derivative of G at the target.
enum class LayerKind { Single, Double, SingleNormalDeriv };

/// Side of Gamma a limit is taken from, or the principal value on Gamma.
enum class Side { Interior, Exterior, PrincipalValue };

struct QbxConfig {
  int order = 4;                ///< expansion order p_QBX
  double center_offset = 0.35;  ///< expansion radius as a fraction of the local panel arclength
  int upsample = 5;             ///< subpanels per panel for the coefficient quadrature

  void validate() const;
};

/// Laplace kernels with G(x, y) = -(1/2pi) log|x - y|.
/// Throws InvalidArgument for coincident points.
double kernel(LayerKind kind, const Point& target, const Point& source, const Point& source_normal,
              const Point& target_normal = Point::Zero());

/// Precomputed QBX machinery for one boundary discretization.
///
/// Expansion centres for on-surface targets sit at x_i -/+ r_i n_i. The radius
/// starts at center_offset times the panel arclength and is halved until no
/// upsampled source lies inside the expansion disk.
class LayerPotentials {
 public:
  LayerPotentials(const BoundaryDiscretization& disc, QbxConfig cfg = {});

  const BoundaryDiscretization& discretization() const { return disc_; }
  const QbxConfig& config() const { return cfg_; }

  /// Density values at the upsampled source nodes (per-panel interpolation).
  Eigen::VectorXd upsample(const Eigen::VectorXd& density) const;
  int upsampled_size() const { return static_cast<int>(up_nodes_.size()); }
  std::span<const Point> upsampled_nodes() const { return up_nodes_; }
  std::span<const double> upsampled_weights() const { return up_weights_; }

  /// Expansion radius used at on-surface node i for a one-sided limit.
  double radius(int node, Side side) const {
    return side == Side::Interior ? radii_in_[node] : radii_out_[node];
  }

  /// N x N matrix of the one-sided limit or principal value at the nodes.
  Eigen::MatrixXd onsurface_matrix(LayerKind kind, Side side) const;

  /// One-sided limit (or principal value) at arbitrary targets on or near Gamma.
  /// Targets must lie on Gamma or on the stated side of it.
  Eigen::VectorXd evaluate_side(LayerKind kind, const Eigen::VectorXd& density,
                                std::span<const Point> targets, Side side) const;

  /// Off-surface evaluation of S or D; the quadrature is chosen per target
  /// from its distance to Gamma (QBX, upsampled direct, or native direct).
  Eigen::VectorXd evaluate(LayerKind kind, const Eigen::VectorXd& density,
                           std::span<const Point> targets) const;

  /// Matrix form of evaluate(): rows are targets, columns are density nodes.
  Eigen::MatrixXd target_matrix(LayerKind kind, std::span<const Point> targets) const;

  /// -D[1], a smooth approximation to the indicator of the enclosed region.
  Eigen::VectorXd indicator(std::span<const Point> targets) const;

 private:
  struct Center {
    Point c;
    double r;
  };

  enum class Route { Qbx, Upsampled, Native };
  struct Plan {
    Route route;
    Center center;
    Point target_normal;
  };

  Center place_center(const Point& base, const Point& normal, double sign, double panel_len,
                      int panel) const;
  Plan plan_target(const Point& x) const;
  // Weights of each upsampled source in the expansion about `center` evaluated at z.
  void qbx_weights(LayerKind kind, const Center& center, const Point& z, const Point& target_normal,
                   Eigen::VectorXd& out) const;
  void direct_weights_up(LayerKind kind, const Point& z, Eigen::VectorXd& out) const;
  void direct_weights_native(LayerKind kind, const Point& z, Eigen::VectorXd& out) const;
  // Contracts a row over upsampled sources to a row over native nodes.
  void contract(const Eigen::VectorXd& up_row, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) const;

  BoundaryDiscretization disc_;
  QbxConfig cfg_;
  Eigen::MatrixXd interp_;  // (upsample * q) x q, shared by all panels
  std::vector<Point> up_nodes_;
  std::vector<Point> up_normals_;
  std::vector<double> up_weights_;
  std::vector<double> radii_in_;
  std::vector<double> radii_out_;
};

/// Plain quadrature sum. Targets closer to Gamma than near_factor times the
/// local node spacing raise NearBoundaryError. S' needs target normals.
Eigen::VectorXd eval_direct(const BoundaryDiscretization& disc, const Eigen::VectorXd& density,
                            LayerKind kind, std::span<const Point> targets,
                            std::span<const Point> target_normals = {}, double near_factor = 2.0);

Eigen::VectorXd eval_qbx(const BoundaryDiscretization& disc, const Eigen::VectorXd& density,
                         LayerKind kind, std::span<const Point> targets, Side side,
                         const QbxConfig& cfg = {});

Eigen::MatrixXd onsurface_matrix(const BoundaryDiscretization& disc, LayerKind kind,
                                 const QbxConfig& cfg = {}, Side side = Side::PrincipalValue);

Eigen::VectorXd indicator(const BoundaryDiscretization& disc, std::span<const Point> targets,
                          const QbxConfig& cfg = {});

}  // namespace feie

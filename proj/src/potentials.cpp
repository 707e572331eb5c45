#include "feie/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "feie/quadrature.hpp"

namespace feie {

namespace {

// even-odd crossing test against the closed polygon through the nodes
bool inside_polygon(const std::vector<Point>& poly, const Point& x) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y() > x.y()) != (b.y() > x.y()) &&
        x.x() < (b.x() - a.x()) * (x.y() - a.y()) / (b.y() - a.y()) + a.x()) {
      inside = !inside;
    }
  }
  return inside;
}

using cplx = std::complex<double>;

constexpr double kInvTwoPi = 0.5 / std::numbers::pi;

cplx to_complex(const Point& p) { return {p.x(), p.y()}; }

}  // namespace

void QbxConfig::validate() const {
  if (order < 1) throw InvalidArgument("QbxConfig: expansion order must be at least 1");
  if (!(center_offset > 0.0)) throw InvalidArgument("QbxConfig: center offset must be positive");
  if (upsample < 1) throw InvalidArgument("QbxConfig: upsampling factor must be at least 1");
}

double kernel(LayerKind kind, const Point& target, const Point& source, const Point& source_normal,
              const Point& target_normal) {
  const Point r = target - source;
  const double r2 = r.squaredNorm();
  if (r2 == 0.0) throw InvalidArgument("kernel: target coincides with source");
  switch (kind) {
    case LayerKind::Single:
      return -0.5 * kInvTwoPi * std::log(r2);
    case LayerKind::Double:
      return kInvTwoPi * r.dot(source_normal) / r2;
    case LayerKind::SingleNormalDeriv:
      return -kInvTwoPi * r.dot(target_normal) / r2;
  }
  return 0.0;
}

LayerPotentials::LayerPotentials(const BoundaryDiscretization& disc, QbxConfig cfg)
    : disc_(disc), cfg_(cfg) {
  cfg_.validate();
  const int q = disc_.nodes_per_panel();
  const int m = cfg_.upsample;
  const auto rule = quadrature::gauss_legendre(q);

  std::vector<double> sub_points;
  sub_points.reserve(m * q);
  for (int s = 0; s < m; ++s) {
    for (int k = 0; k < q; ++k) sub_points.push_back((s + rule.points[k]) / m);
  }
  interp_ = quadrature::interpolation_matrix(disc_.reference_points(), sub_points);

  const Curve& curve = disc_.curve();
  const int n_panels = disc_.panel_count();
  const double dt = 1.0 / n_panels;
  up_nodes_.reserve(n_panels * m * q);
  up_normals_.reserve(n_panels * m * q);
  up_weights_.reserve(n_panels * m * q);
  for (int p = 0; p < n_panels; ++p) {
    for (int s = 0; s < m; ++s) {
      for (int k = 0; k < q; ++k) {
        const double t = (p + sub_points[s * q + k]) * dt;
        up_nodes_.push_back(curve.position(t));
        up_normals_.push_back(curve.normal(t));
        up_weights_.push_back(rule.weights[k] * dt / m * curve.speed(t));
      }
    }
  }

  const int n = disc_.size();
  radii_in_.resize(n);
  radii_out_.resize(n);
  for (int i = 0; i < n; ++i) {
    const int panel = disc_.panel_of(i);
    const double len = disc_.panel_length(panel);
    radii_in_[i] = place_center(disc_.node(i), disc_.normal(i), -1.0, len, panel).r;
    radii_out_[i] = place_center(disc_.node(i), disc_.normal(i), 1.0, len, panel).r;
  }
}

Eigen::VectorXd LayerPotentials::upsample(const Eigen::VectorXd& density) const {
  const int q = disc_.nodes_per_panel();
  if (density.size() != disc_.size()) throw InvalidArgument("upsample: density length mismatch");
  const int uq = static_cast<int>(interp_.rows());
  Eigen::VectorXd out(disc_.panel_count() * uq);
  for (int p = 0; p < disc_.panel_count(); ++p) {
    out.segment(p * uq, uq).noalias() = interp_ * density.segment(p * q, q);
  }
  return out;
}

LayerPotentials::Center LayerPotentials::place_center(const Point& base, const Point& normal,
                                                      double sign, double panel_len,
                                                      int panel) const {
  const double r0 = cfg_.center_offset * panel_len;
  double r = r0;
  while (true) {
    const Point c = base + sign * r * normal;
    double closest2 = std::numeric_limits<double>::infinity();
    for (const Point& s : up_nodes_) closest2 = std::min(closest2, (s - c).squaredNorm());
    if (std::sqrt(closest2) >= 0.98 * r && inside_polygon(up_nodes_, c) == (sign < 0)) return {c, r};
    r *= 0.5;
    if (r < r0 / 64.0) {
      throw QbxGeometryError("QBX: no admissible expansion center on the " +
                             std::string(sign < 0 ? "interior" : "exterior") + " side of panel " +
                             std::to_string(panel) + "; refine the boundary");
    }
  }
}

LayerPotentials::Plan LayerPotentials::plan_target(const Point& x) const {
  const PointLocation loc = locate(disc_, x);
  Plan plan{Route::Native, {x, 0.0}, Point::Zero()};
  if (loc.distance >= 2.0 * disc_.h_ie()) return plan;
  plan.route = Route::Upsampled;
  const int panel = disc_.panel_at(loc.t_closest);
  const double len = disc_.panel_length(panel);
  if (loc.distance < cfg_.center_offset * len) {
    const Point n = disc_.curve().normal(loc.t_closest);
    const Center c = place_center(loc.closest, n, loc.inside ? -1.0 : 1.0, len, panel);
    if (loc.distance < c.r) {
      plan.route = Route::Qbx;
      plan.center = c;
      plan.target_normal = n;
    }
  }
  return plan;
}

void LayerPotentials::qbx_weights(LayerKind kind, const Center& center, const Point& z,
                                  const Point& target_normal, Eigen::VectorXd& out) const {
  const int n_up = upsampled_size();
  out.resize(n_up);
  const int p = cfg_.order;
  const cplx c = to_complex(center.c);
  const cplx zc = to_complex(z) - c;
  const cplx nt = to_complex(target_normal);
  for (int j = 0; j < n_up; ++j) {
    const cplx u = to_complex(up_nodes_[j]) - c;
    const cplx rho = zc / u;
    double v = 0.0;
    switch (kind) {
      case LayerKind::Single: {
        cplx sum = 0.0, pw = 1.0;
        for (int k = 1; k <= p; ++k) {
          pw *= rho;
          sum += pw / static_cast<double>(k);
        }
        v = kInvTwoPi * (sum.real() - std::log(std::abs(u)));
        break;
      }
      case LayerKind::Double: {
        cplx sum = 0.0, pw = 1.0;
        for (int k = 0; k <= p; ++k) {
          sum += pw;
          pw *= rho;
        }
        v = -kInvTwoPi * (to_complex(up_normals_[j]) / u * sum).real();
        break;
      }
      case LayerKind::SingleNormalDeriv: {
        // the field itself is expanded to degree p, as for D
        cplx sum = 0.0, pw = 1.0;
        for (int k = 0; k <= p; ++k) {
          sum += pw;
          pw *= rho;
        }
        v = kInvTwoPi * (nt / u * sum).real();
        break;
      }
    }
    out[j] = v * up_weights_[j];
  }
}

void LayerPotentials::direct_weights_up(LayerKind kind, const Point& z, Eigen::VectorXd& out) const {
  const int n_up = upsampled_size();
  out.resize(n_up);
  for (int j = 0; j < n_up; ++j) out[j] = up_weights_[j] * kernel(kind, z, up_nodes_[j], up_normals_[j]);
}

void LayerPotentials::direct_weights_native(LayerKind kind, const Point& z,
                                            Eigen::VectorXd& out) const {
  const int n = disc_.size();
  out.resize(n);
  for (int j = 0; j < n; ++j) out[j] = disc_.weight(j) * kernel(kind, z, disc_.node(j), disc_.normal(j));
}

void LayerPotentials::contract(const Eigen::VectorXd& up_row,
                               Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) const {
  const int q = disc_.nodes_per_panel();
  const int uq = static_cast<int>(interp_.rows());
  for (int p = 0; p < disc_.panel_count(); ++p) {
    row.segment(p * q, q).noalias() = up_row.segment(p * uq, uq).transpose() * interp_;
  }
}

Eigen::MatrixXd LayerPotentials::onsurface_matrix(LayerKind kind, Side side) const {
  const int n = disc_.size();
  if (side == Side::PrincipalValue) {
    Eigen::MatrixXd m = onsurface_matrix(kind, Side::Interior);
    m += onsurface_matrix(kind, Side::Exterior);
    m *= 0.5;
    return m;
  }
  const double sign = side == Side::Interior ? -1.0 : 1.0;
  Eigen::MatrixXd m(n, n);
  Eigen::VectorXd up_row;
  for (int i = 0; i < n; ++i) {
    const double r = radius(i, side);
    const Center c{disc_.node(i) + sign * r * disc_.normal(i), r};
    qbx_weights(kind, c, disc_.node(i), disc_.normal(i), up_row);
    contract(up_row, m.row(i));
  }
  return m;
}

Eigen::VectorXd LayerPotentials::evaluate_side(LayerKind kind, const Eigen::VectorXd& density,
                                               std::span<const Point> targets, Side side) const {
  if (side == Side::PrincipalValue) {
    return 0.5 * (evaluate_side(kind, density, targets, Side::Interior) +
                  evaluate_side(kind, density, targets, Side::Exterior));
  }
  const Eigen::VectorXd up = upsample(density);
  const double sign = side == Side::Interior ? -1.0 : 1.0;
  const double on_tol = 1e-12 * disc_.h_ie();
  Eigen::VectorXd out(targets.size());
  Eigen::VectorXd w;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Point& x = targets[i];
    const PointLocation loc = locate(disc_, x);
    if (loc.distance > on_tol && loc.inside != (side == Side::Interior)) {
      throw InvalidArgument("evaluate_side: target lies on the opposite side of the boundary");
    }
    const int panel = disc_.panel_at(loc.t_closest);
    const double len = disc_.panel_length(panel);
    const Point n = disc_.curve().normal(loc.t_closest);
    if (loc.distance < cfg_.center_offset * len) {
      const Center c = place_center(loc.closest, n, sign, len, panel);
      if (loc.distance < c.r) {
        qbx_weights(kind, c, x, n, w);
        out[i] = w.dot(up);
        continue;
      }
    }
    if (kind == LayerKind::SingleNormalDeriv) {
      throw InvalidArgument("evaluate_side: S' is only available on or next to the boundary");
    }
    direct_weights_up(kind, x, w);
    out[i] = w.dot(up);
  }
  return out;
}

Eigen::VectorXd LayerPotentials::evaluate(LayerKind kind, const Eigen::VectorXd& density,
                                          std::span<const Point> targets) const {
  if (kind == LayerKind::SingleNormalDeriv) {
    throw InvalidArgument("evaluate: off-surface S' requires target normals; use eval_direct");
  }
  if (density.size() != disc_.size()) throw InvalidArgument("evaluate: density length mismatch");
  const Eigen::VectorXd up = upsample(density);
  Eigen::VectorXd out(targets.size());
  Eigen::VectorXd w;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Plan plan = plan_target(targets[i]);
    switch (plan.route) {
      case Route::Native:
        direct_weights_native(kind, targets[i], w);
        out[i] = w.dot(density);
        break;
      case Route::Upsampled:
        direct_weights_up(kind, targets[i], w);
        out[i] = w.dot(up);
        break;
      case Route::Qbx:
        qbx_weights(kind, plan.center, targets[i], plan.target_normal, w);
        out[i] = w.dot(up);
        break;
    }
  }
  return out;
}

Eigen::MatrixXd LayerPotentials::target_matrix(LayerKind kind, std::span<const Point> targets) const {
  if (kind == LayerKind::SingleNormalDeriv) {
    throw InvalidArgument("target_matrix: off-surface S' is not supported");
  }
  Eigen::MatrixXd m(targets.size(), disc_.size());
  Eigen::VectorXd w;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Plan plan = plan_target(targets[i]);
    switch (plan.route) {
      case Route::Native:
        direct_weights_native(kind, targets[i], w);
        m.row(i) = w.transpose();
        break;
      case Route::Upsampled:
        direct_weights_up(kind, targets[i], w);
        contract(w, m.row(i));
        break;
      case Route::Qbx:
        qbx_weights(kind, plan.center, targets[i], plan.target_normal, w);
        contract(w, m.row(i));
        break;
    }
  }
  return m;
}

Eigen::VectorXd LayerPotentials::indicator(std::span<const Point> targets) const {
  return -evaluate(LayerKind::Double, Eigen::VectorXd::Ones(disc_.size()), targets);
}

Eigen::VectorXd eval_direct(const BoundaryDiscretization& disc, const Eigen::VectorXd& density,
                            LayerKind kind, std::span<const Point> targets,
                            std::span<const Point> target_normals, double near_factor) {
  if (density.size() != disc.size()) throw InvalidArgument("eval_direct: density length mismatch");
  if (kind == LayerKind::SingleNormalDeriv && target_normals.size() != targets.size()) {
    throw InvalidArgument("eval_direct: S' needs one normal per target");
  }
  Eigen::VectorXd out(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const PointLocation loc = locate(disc, targets[i], near_factor);
    if (loc.near) {
      throw NearBoundaryError("eval_direct: target " + std::to_string(i) +
                              " is inside the near-boundary band; use QBX evaluation");
    }
    const Point tn = kind == LayerKind::SingleNormalDeriv ? target_normals[i] : Point::Zero();
    double s = 0.0;
    for (int j = 0; j < disc.size(); ++j) {
      s += disc.weight(j) * kernel(kind, targets[i], disc.node(j), disc.normal(j), tn) * density[j];
    }
    out[i] = s;
  }
  return out;
}

Eigen::VectorXd eval_qbx(const BoundaryDiscretization& disc, const Eigen::VectorXd& density,
                         LayerKind kind, std::span<const Point> targets, Side side,
                         const QbxConfig& cfg) {
  return LayerPotentials(disc, cfg).evaluate_side(kind, density, targets, side);
}

Eigen::MatrixXd onsurface_matrix(const BoundaryDiscretization& disc, LayerKind kind,
                                 const QbxConfig& cfg, Side side) {
  return LayerPotentials(disc, cfg).onsurface_matrix(kind, side);
}

Eigen::VectorXd indicator(const BoundaryDiscretization& disc, std::span<const Point> targets,
                          const QbxConfig& cfg) {
  return LayerPotentials(disc, cfg).indicator(targets);
}

}  // namespace feie

#include "feie/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "feie/quadrature.hpp"

namespace feie {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_unit(double t) {
  t -= std::floor(t);
  return t >= 1.0 ? 0.0 : t;
}

}  // namespace

double Rect::boundary_distance(const Point& p) const {
  return std::min({p.x() - x_min, x_max - p.x(), p.y() - y_min, y_max - p.y()});
}

Curve::Curve(PathFn position, PathFn first_derivative, PathFn second_derivative)
    : position_(std::move(position)),
      first_(std::move(first_derivative)),
      second_(std::move(second_derivative)) {
  // signed area via the shoelace formula on a fine sampling
  constexpr int n = 2048;
  double area = 0.0;
  Point prev = position_(0.0);
  for (int i = 1; i <= n; ++i) {
    const Point cur = position_(static_cast<double>(i % n) / n);
    area += prev.x() * cur.y() - cur.x() * prev.y();
    prev = cur;
  }
  if (std::abs(area) < 1e-14) throw InvalidArgument("Curve: enclosed area vanishes");
  counterclockwise_ = area > 0.0;
}

Point Curve::normal(double t) const {
  const Point d = first_(t);
  const double s = d.norm();
  // rotate the tangent by -90 degrees for counterclockwise curves
  const Point n = counterclockwise_ ? Point(d.y(), -d.x()) : Point(-d.y(), d.x());
  return n / s;
}

double Curve::arclength(int panels, int points) const {
  const auto rule = quadrature::gauss_legendre(points);
  double len = 0.0;
  for (int p = 0; p < panels; ++p) {
    for (int k = 0; k < rule.size(); ++k) {
      const double t = (p + rule.points[k]) / panels;
      len += rule.weights[k] / panels * speed(t);
    }
  }
  return len;
}

std::shared_ptr<const Curve> circle(const Point& center, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("circle: radius must be positive");
  auto pos = [center, radius](double t) {
    const double a = kTwoPi * t;
    return Point(center.x() + radius * std::cos(a), center.y() + radius * std::sin(a));
  };
  auto d1 = [radius](double t) {
    const double a = kTwoPi * t;
    return Point(-kTwoPi * radius * std::sin(a), kTwoPi * radius * std::cos(a));
  };
  auto d2 = [radius](double t) {
    const double a = kTwoPi * t;
    return Point(-kTwoPi * kTwoPi * radius * std::cos(a), -kTwoPi * kTwoPi * radius * std::sin(a));
  };
  return std::make_shared<const Curve>(pos, d1, d2);
}

std::shared_ptr<const Curve> starfish() {
  constexpr double pi = std::numbers::pi;
  // r(t) = 1/2 + 1/8 sin(10 pi t), angle 2 pi t
  auto radius = [](double t) { return 0.5 + 0.125 * std::sin(10.0 * pi * t); };
  auto radius_d1 = [](double t) { return 0.125 * 10.0 * pi * std::cos(10.0 * pi * t); };
  auto radius_d2 = [](double t) { return -0.125 * 100.0 * pi * pi * std::sin(10.0 * pi * t); };
  auto pos = [radius](double t) {
    const double a = kTwoPi * t;
    return Point(radius(t) * std::cos(a), radius(t) * std::sin(a));
  };
  auto d1 = [radius, radius_d1](double t) {
    const double a = kTwoPi * t;
    const double r = radius(t), dr = radius_d1(t);
    return Point(dr * std::cos(a) - kTwoPi * r * std::sin(a), dr * std::sin(a) + kTwoPi * r * std::cos(a));
  };
  auto d2 = [radius, radius_d1, radius_d2](double t) {
    const double a = kTwoPi * t;
    const double r = radius(t), dr = radius_d1(t), ddr = radius_d2(t);
    const double c = std::cos(a), s = std::sin(a);
    return Point(ddr * c - 2.0 * kTwoPi * dr * s - kTwoPi * kTwoPi * r * c,
                 ddr * s + 2.0 * kTwoPi * dr * c - kTwoPi * kTwoPi * r * s);
  };
  return std::make_shared<const Curve>(pos, d1, d2);
}

int BoundaryDiscretization::panel_at(double t) const {
  const int p = static_cast<int>(std::floor(wrap_unit(t) * n_panels_));
  return std::clamp(p, 0, n_panels_ - 1);
}

double BoundaryDiscretization::total_weight() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

BoundaryDiscretization build_panels(std::shared_ptr<const Curve> curve, int n_panels, int q) {
  if (!curve) throw InvalidArgument("build_panels: null curve");
  if (n_panels < 4) throw InvalidArgument("build_panels: need at least 4 panels");
  if (q < 4) throw InvalidArgument("build_panels: need at least 4 nodes per panel");

  const auto rule = quadrature::gauss_legendre(q);
  const auto fine = quadrature::gauss_legendre(std::max(2 * q, 20));

  BoundaryDiscretization d;
  d.curve_ = std::move(curve);
  d.n_panels_ = n_panels;
  d.q_ = q;
  d.ref_points_ = rule.points;
  const int n = n_panels * q;
  d.nodes_.reserve(n);
  d.normals_.reserve(n);
  d.weights_.reserve(n);
  d.params_.reserve(n);
  d.panel_lengths_.resize(n_panels);

  const double dt = 1.0 / n_panels;
  for (int p = 0; p < n_panels; ++p) {
    for (int k = 0; k < q; ++k) {
      const double t = (p + rule.points[k]) * dt;
      const double s = d.curve_->speed(t);
      if (!(s > 1e-12)) {
        throw InvalidArgument("build_panels: degenerate parametrization (zero speed) on panel " +
                              std::to_string(p));
      }
      d.nodes_.push_back(d.curve_->position(t));
      d.normals_.push_back(d.curve_->normal(t));
      d.weights_.push_back(rule.weights[k] * dt * s);
      d.params_.push_back(t);
    }
    double len = 0.0;
    for (int k = 0; k < fine.size(); ++k) len += fine.weights[k] * dt * d.curve_->speed((p + fine.points[k]) * dt);
    d.panel_lengths_[p] = len;
  }
  d.h_ie_ = *std::max_element(d.panel_lengths_.begin(), d.panel_lengths_.end());
  return d;
}

namespace {

// Newton iteration for the closest curve point, started from parameter t0.
double project_to_curve(const Curve& curve, const Point& x, double t0, double max_step) {
  double t = t0;
  for (int it = 0; it < 40; ++it) {
    const Point r = curve.position(t) - x;
    const Point d1 = curve.derivative(t);
    const Point d2 = curve.second_derivative(t);
    const double g = r.dot(d1);
    double hess = d1.squaredNorm() + r.dot(d2);
    if (hess <= 0.0) hess = d1.squaredNorm();
    const double step = std::clamp(-g / hess, -max_step, max_step);
    t += step;
    if (std::abs(step) < 1e-15) break;
  }
  return wrap_unit(t);
}

bool polygon_contains(std::span<const Point> poly, const Point& x) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y() > x.y()) != (b.y() > x.y())) {
      const double xc = a.x() + (x.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (x.x() < xc) inside = !inside;
    }
  }
  return inside;
}

}  // namespace

PointLocation locate(const BoundaryDiscretization& disc, const Point& x, double near_factor) {
  PointLocation loc;
  const auto nodes = disc.nodes();
  double best = std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i < disc.size(); ++i) {
    const double d2 = (nodes[i] - x).squaredNorm();
    if (d2 < best) {
      best = d2;
      best_i = i;
    }
  }
  loc.nearest_node = best_i;
  loc.distance = std::sqrt(best);
  loc.t_closest = disc.parameter(best_i);
  loc.closest = nodes[best_i];

  const double panel_len = disc.panel_length(disc.panel_of(best_i));
  if (loc.distance < 2.0 * panel_len) {
    const Curve& c = disc.curve();
    const double t = project_to_curve(c, x, loc.t_closest, 0.5 / disc.panel_count());
    const Point p = c.position(t);
    const double d = (p - x).norm();
    if (d <= loc.distance) {
      loc.distance = d;
      loc.t_closest = t;
      loc.closest = p;
    }
    loc.inside = (x - loc.closest).dot(c.normal(loc.t_closest)) < 0.0;
    // far enough that the projection may have picked a local minimum: trust the polygon
    if (loc.distance > 0.5 * panel_len) loc.inside = polygon_contains(nodes, x);
  } else {
    loc.inside = polygon_contains(nodes, x);
  }
  const double spacing = disc.panel_length(disc.panel_at(loc.t_closest)) / disc.nodes_per_panel();
  loc.near = loc.distance < near_factor * spacing;
  return loc;
}

Region point_in_domain(const BoundaryDiscretization& disc, const Point& x, double near_factor) {
  const PointLocation loc = locate(disc, x, near_factor);
  if (loc.near) return Region::NearBoundary;
  return loc.inside ? Region::Inside : Region::Outside;
}

void write_curve_samples(const Curve& curve, int n, std::ostream& out) {
  if (n < 3) throw InvalidArgument("write_curve_samples: need at least 3 samples");
  out.precision(17);
  for (int i = 0; i <= n; ++i) {
    const Point p = curve.position(static_cast<double>(i % n) / n);
    out << p.x() << ' ' << p.y() << '\n';
  }
}

}  // namespace feie

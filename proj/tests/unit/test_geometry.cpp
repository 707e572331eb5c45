#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <numbers>
#include <sstream>

#include "feie/geometry.hpp"
#include "feie/quadrature.hpp"

using namespace feie;
using std::numbers::pi;

TEST(Circle, PositionAtZeroIsAngleZero) {
  const auto c = circle({0.0, 0.0}, 0.5);
  EXPECT_DOUBLE_EQ(c->position(0.0).x(), 0.5);
  EXPECT_NEAR(c->position(0.0).y(), 0.0, 1e-16);
}

TEST(Circle, ArclengthIsTwoPiR) { EXPECT_NEAR(circle({0.0, 0.0}, 0.5)->arclength(), pi, 1e-13); }

TEST(Circle, NormalAtQuarterTurn) {
  const Point n = circle({0.0, 0.0}, 1.0)->normal(0.25);
  EXPECT_NEAR(n.x(), 0.0, 1e-15);
  EXPECT_NEAR(n.y(), 1.0, 1e-15);
}

TEST(Circle, NormalEqualsRadialDirection) {
  const auto c = circle({0.3, -0.2}, 2.0);
  for (double t = 0.0; t < 1.0; t += 0.0625) {
    const Point n = c->normal(t);
    EXPECT_NEAR(n.x(), std::cos(2 * pi * t), 1e-14);
    EXPECT_NEAR(n.y(), std::sin(2 * pi * t), 1e-14);
  }
}

TEST(Circle, RejectsNonPositiveRadius) {
  EXPECT_THROW(circle({0.0, 0.0}, 0.0), InvalidArgument);
  EXPECT_THROW(circle({0.0, 0.0}, -1.0), InvalidArgument);
}

TEST(Starfish, IsPeriodic) {
  const auto s = starfish();
  const Point a = s->position(0.3), b = s->position(1.3);
  EXPECT_NEAR((a - b).norm(), 0.0, 1e-14);
  EXPECT_NEAR((s->position(0.0) - s->position(1.0)).norm(), 0.0, 1e-15);
}

TEST(Starfish, RadiusFromCentroidStaysWithinOscillationBound) {
  // oracle: the curve is r(t) (cos 2 pi t, sin 2 pi t) with r(t) = 1/2 + (1/8) sin(10 pi t)
  const auto s = starfish();
  Point centroid = Point::Zero();
  constexpr int n = 10000;
  for (int i = 0; i < n; ++i) centroid += s->position(static_cast<double>(i) / n);
  centroid /= n;
  EXPECT_LT(centroid.norm(), 1e-12);
  double rmin = 1.0, rmax = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = (s->position(static_cast<double>(i) / n) - centroid).norm();
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
    EXPECT_LE(std::abs(r - 0.5), 0.125 + 1e-12);
  }
  EXPECT_NEAR(rmin, 0.375, 1e-6);
  EXPECT_NEAR(rmax, 0.625, 1e-6);
}

TEST(Starfish, NormalPointsOutward) {
  const auto s = starfish();
  const auto disc = build_panels(s, 64, 8);
  for (double t = 0.01; t < 1.0; t += 0.05) {
    const Point x = s->position(t) + 1e-4 * s->normal(t);
    EXPECT_FALSE(locate(disc, x).inside) << "t=" << t;
    const Point y = s->position(t) - 1e-4 * s->normal(t);
    EXPECT_TRUE(locate(disc, y).inside) << "t=" << t;
  }
}

TEST(Curve, ClockwiseParametrizationStillGetsOutwardNormals) {
  auto cw = std::make_shared<const Curve>(
      [](double t) { return Point(std::cos(-2 * pi * t), std::sin(-2 * pi * t)); },
      [](double t) { return Point(2 * pi * std::sin(-2 * pi * t), -2 * pi * std::cos(-2 * pi * t)); },
      [](double t) { return Point(-4 * pi * pi * std::cos(-2 * pi * t), -4 * pi * pi * std::sin(-2 * pi * t)); });
  EXPECT_FALSE(cw->counterclockwise());
  for (double t = 0.0; t < 1.0; t += 0.1) {
    EXPECT_NEAR((cw->normal(t) - cw->position(t)).norm(), 0.0, 1e-13);
  }
}

TEST(BuildPanels, UnitCircleWeightsSumToTwoPi) {
  const auto disc = build_panels(circle({0.0, 0.0}, 1.0), 16, 8);
  EXPECT_NEAR(disc.total_weight(), 2 * pi, 1e-12);
  const auto coarse = build_panels(circle({0.0, 0.0}, 1.0), 8, 8);
  EXPECT_LT(std::abs(coarse.total_weight() - 2 * pi), 1e-10);
}

TEST(BuildPanels, UnitCircleNodesLieOnCurve) {
  const auto disc = build_panels(circle({0.0, 0.0}, 1.0), 16, 8);
  ASSERT_EQ(disc.size(), 128);
  for (const Point& x : disc.nodes()) EXPECT_NEAR(x.norm(), 1.0, 1e-14);
}

TEST(BuildPanels, UnitNormalsOrthogonalToTangent) {
  const auto disc = build_panels(starfish(), 20, 8);
  for (int i = 0; i < disc.size(); ++i) {
    EXPECT_NEAR(disc.normal(i).norm(), 1.0, 1e-14);
    const Point tangent = disc.curve().derivative(disc.parameter(i));
    EXPECT_NEAR(disc.normal(i).dot(tangent) / tangent.norm(), 0.0, 1e-12);
  }
}

TEST(BuildPanels, StarfishPanelDoublingHalvesHie) {
  const auto a = build_panels(starfish(), 20, 8);
  const auto b = build_panels(starfish(), 40, 8);
  // mean panel arclength halves exactly; the maximum follows within five hundredths
  EXPECT_NEAR(b.total_weight() / 40 / (a.total_weight() / 20), 0.5, 1e-8);
  EXPECT_NEAR(b.h_ie() / a.h_ie(), 0.5, 0.05);
}

TEST(BuildPanels, PanelsPartitionTheParameterInterval) {
  const auto disc = build_panels(starfish(), 12, 6);
  for (int i = 0; i < disc.size(); ++i) {
    const double t = disc.parameter(i);
    EXPECT_EQ(disc.panel_at(t), disc.panel_of(i));
    EXPECT_GE(t, 0.0);
    EXPECT_LT(t, 1.0);
  }
  double total = 0.0;
  for (int p = 0; p < disc.panel_count(); ++p) total += disc.panel_length(p);
  // panel lengths use a 20-point rule per panel
  EXPECT_NEAR(total, disc.curve().arclength(2048, 20), 1e-8);
}

TEST(BuildPanels, QuadratureExactForPolynomialsInTheParameter) {
  // on the unit circle the speed is constant 2 pi, so int_Gamma t^k ds = 2 pi / (k + 1)
  const int q = 6;
  const auto disc = build_panels(circle({0.0, 0.0}, 1.0), 8, q);
  for (int k = 0; k <= 2 * q - 1; ++k) {
    double s = 0.0;
    for (int i = 0; i < disc.size(); ++i) s += disc.weight(i) * std::pow(disc.parameter(i), k);
    EXPECT_NEAR(s, 2 * pi / (k + 1), 1e-12) << "k=" << k;
  }
}

TEST(BuildPanels, StarfishArclengthConvergesAtHighOrder) {
  // per-pair rates are noisy because panel errors partly cancel on a periodic
  // curve, so the order is the least-squares slope over four doublings
  const int q = 4;
  const double exact = starfish()->arclength(2048, 20);
  std::vector<double> lx, ly;
  for (int k = 0, n = 20; n <= 160; ++k, n *= 2) {
    lx.push_back(k);
    ly.push_back(std::log2(std::abs(build_panels(starfish(), n, q).total_weight() - exact)));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  EXPECT_GE(-sxy / sxx, 2 * q);
}

TEST(BuildPanels, RejectsTooFewPanelsOrNodes) {
  EXPECT_THROW(build_panels(circle({0, 0}, 1.0), 3, 8), InvalidArgument);
  EXPECT_THROW(build_panels(circle({0, 0}, 1.0), 8, 3), InvalidArgument);
}

TEST(BuildPanels, RejectsZeroSpeed) {
  // reparametrized unit circle whose speed vanishes exactly at the first node
  const double ts = quadrature::gauss_legendre(8).points[0] / 8.0;
  auto s = [ts](double t) { return t - (std::sin(2 * pi * (t - ts)) + std::sin(2 * pi * ts)) / (2 * pi); };
  auto ds = [ts](double t) { return 1.0 - std::cos(2 * pi * (t - ts)); };
  auto degenerate = std::make_shared<const Curve>(
      [s](double t) -> Point { return Point(std::cos(2 * pi * s(t)), std::sin(2 * pi * s(t))); },
      [s, ds](double t) -> Point { return Point(-std::sin(2 * pi * s(t)), std::cos(2 * pi * s(t))) * (2 * pi * ds(t)); },
      [](double) -> Point { return Point(0.0, 0.0); });
  EXPECT_THROW(build_panels(degenerate, 8, 8), InvalidArgument);
  EXPECT_NO_THROW(build_panels(degenerate, 9, 8));
}

TEST(PointInDomain, CircleCenterIsInside) {
  const auto disc = build_panels(circle({0, 0}, 0.5), 16, 8);
  EXPECT_EQ(point_in_domain(disc, {0.0, 0.0}), Region::Inside);
}

TEST(PointInDomain, FarPointIsOutside) {
  const auto disc = build_panels(circle({0, 0}, 0.5), 16, 8);
  EXPECT_EQ(point_in_domain(disc, {2.0, 2.0}), Region::Outside);
}

TEST(PointInDomain, PointJustOutsideIsNearBoundary) {
  const auto disc = build_panels(circle({0, 0}, 0.5), 16, 8);
  // oracle: local node spacing is the panel arclength over q = pi / 128
  EXPECT_NEAR(disc.node_spacing(0), pi / 128, 1e-12);
  const auto loc = locate(disc, {0.5 + 1e-4, 0.0});
  EXPECT_NEAR(loc.distance, 1e-4, 1e-12);
  EXPECT_LT(loc.distance, 2.0 * pi / 128);
  EXPECT_EQ(point_in_domain(disc, {0.5 + 1e-4, 0.0}), Region::NearBoundary);
  EXPECT_FALSE(loc.inside);
}

TEST(PointInDomain, NearThresholdIsConfigurable) {
  const auto disc = build_panels(circle({0, 0}, 0.5), 16, 8);
  const Point x(0.5 + 0.03, 0.0);  // 0.03 is between 1x and 2x the spacing (0.0245)
  EXPECT_EQ(point_in_domain(disc, x, 2.0), Region::NearBoundary);
  EXPECT_EQ(point_in_domain(disc, x, 1.0), Region::Outside);
}

TEST(CurveSamples, WritesClosedLoop) {
  std::ostringstream out;
  write_curve_samples(*circle({0, 0}, 1.0), 4, out);
  std::istringstream in(out.str());
  double x, y;
  int lines = 0;
  Point first, last;
  while (in >> x >> y) {
    if (lines == 0) first = {x, y};
    last = {x, y};
    ++lines;
  }
  EXPECT_EQ(lines, 5);
  EXPECT_EQ(first, last);
}

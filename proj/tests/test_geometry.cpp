#include "dwos/geometry/bezier.hpp"
#include "dwos/geometry/monopoles.hpp"
#include "dwos/geometry/polyline.hpp"
#include "dwos/geometry/sphere_set.hpp"
#include "dwos/kernels/sampling.hpp"

#include <gtest/gtest.h>

using namespace dwos;

namespace {

std::vector<Vec2> square_points() { return {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}; }

Polyline square() { return Polyline::with_vertex_params(square_points(), Polyline::single_loop(4)); }

std::vector<BezierAnchor> circle_anchors(int n, double R = 1.0) {
  const double k = 4.0 / 3.0 * std::tan(kPi / (2.0 * n)) * R;
  std::vector<BezierAnchor> a;
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * kPi * i / n;
    a.push_back({R * Vec2(std::cos(th), std::sin(th)), k * Vec2(-std::sin(th), std::cos(th)), std::nullopt, true});
  }
  return a;
}

BezierChain bezier_circle(int n = 8) { return BezierChain(circle_anchors(n), {[n] {
                                                               std::vector<int> l(n);
                                                               for (int i = 0; i < n; ++i) l[i] = i;
                                                               return l;
                                                             }()}); }

}  // namespace

TEST(SphereSet, UnitCircleClosest) {
  SphereSet<2> s({{{0.0, 0.0}, 1.0, false}});
  const auto q = s.closest(Vec2(0.25, 0.0));
  EXPECT_NEAR(q.distance, 0.75, 1e-15);
  EXPECT_NEAR((q.closest - Vec2(1, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((q.normal - Vec2(1, 0)).norm(), 0.0, 1e-15);
  EXPECT_TRUE(s.contains(Vec2(0.25, 0.0)));
  EXPECT_FALSE(s.contains(Vec2(1.25, 0.0)));
}

TEST(SphereSet, AnnulusNormalPointsIntoHole) {
  SphereSet<2> s({{{0.0, 0.0}, 2.0, false}, {{0.0, 0.0}, 1.0, true}});
  EXPECT_FALSE(s.contains(Vec2(0.5, 0.0)));
  const auto q = s.closest(Vec2(1.2, 0.0));
  EXPECT_EQ(q.primitive, 1);
  EXPECT_NEAR((q.normal - Vec2(-1, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(s.curvature(q), -1.0, 1e-15);
}

TEST(SphereSet, RadiusVelocityIsOne) {
  SphereSet<3> s({{{0.0, 0.0, 0.0}, 2.0, false}});
  CounterRng rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto b = s.sample_boundary(rng);
    const auto vn = s.normal_velocity(b.query);
    double radius_entry = 0.0;
    for (auto [k, v] : vn)
      if (k == 3) radius_entry = v;
    EXPECT_NEAR(radius_entry, 1.0, 1e-14);
  }
}

TEST(SphereSet, SamplePdfAndCurvature) {
  SphereSet<2> s({{{0.0, 0.0}, 1.0, false}});
  CounterRng rng(2);
  for (int i = 0; i < 10; ++i) {
    const auto b = s.sample_boundary(rng);
    EXPECT_NEAR(b.pdf, 1.0 / (2.0 * kPi), 1e-15);
    EXPECT_NEAR(s.curvature(b.query), 1.0, 1e-15);
  }
  SphereSet<2> big({{{0.0, 0.0}, 3.0, false}});
  EXPECT_NEAR(big.curvature(big.closest(Vec2(0.1, 0.2))), 1.0 / 3.0, 1e-15);
}

TEST(Polyline, SquareTieBreaksToLowestSegment) {
  const Polyline p = square();
  const auto q = p.closest(Vec2(0, 0));
  EXPECT_NEAR(q.distance, 1.0, 1e-15);
  EXPECT_EQ(q.primitive, 0);
  EXPECT_NEAR((q.closest - Vec2(0, -1)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((q.normal - Vec2(0, -1)).norm(), 0.0, 1e-15);
}

TEST(Polyline, ContainsAndStep) {
  const Polyline p = square();
  EXPECT_TRUE(p.contains(Vec2(0.9, -0.3)));
  EXPECT_FALSE(p.contains(Vec2(1.1, 0.0)));
  const auto s = p.step(Vec2(0.5, 0.0), 1e-3);
  EXPECT_NEAR(s.radius, 0.5, 1e-15);
  EXPECT_FALSE(s.terminated);
  EXPECT_TRUE(p.step(Vec2(0.9995, 0.0), 1e-3).terminated);
}

TEST(Polyline, MidpointVelocityIsHalf) {
  const Polyline p = square();
  const auto q = p.closest(Vec2(0.0, -0.5));  // midpoint of segment 0, from vertex 0 to vertex 1
  ASSERT_EQ(q.primitive, 0);
  const auto vn = p.normal_velocity(q);
  std::vector<double> dense(p.num_params(), 0.0);
  for (auto [k, v] : vn) dense[k] = v;
  EXPECT_NEAR(dense[1], 0.5 * q.normal.y(), 1e-15);  // vertex 0, y coordinate
  EXPECT_NEAR(dense[3], 0.5 * q.normal.y(), 1e-15);  // vertex 1, y coordinate
  EXPECT_EQ(dense[0], 0.0);
  EXPECT_EQ(dense[4], 0.0);
}

TEST(Polyline, SquarePdfAndPerimeter) {
  const Polyline p = square();
  EXPECT_NEAR(p.perimeter(), 8.0, 1e-14);
  CounterRng rng(4);
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(p.sample_boundary(rng).pdf, 0.125, 1e-15);
  // vertex 1 lies on a straight side
  const Polyline mid = Polyline::with_vertex_params({{-1, -1}, {0, -1}, {1, -1}, {1, 1}, {-1, 1}}, Polyline::single_loop(5));
  EXPECT_EQ(mid.curvature(mid.closest(Vec2(0.05, -0.5))), 0.0);
}

TEST(Polyline, SetParamsRejectsBadCountAndKeepsState) {
  Polyline p = square();
  const std::vector<double> before(p.params().begin(), p.params().end());
  EXPECT_THROW(p.set_params(std::vector<double>(3, 0.0)), ConfigError);
  EXPECT_EQ(std::vector<double>(p.params().begin(), p.params().end()), before);
}

TEST(Polyline, TranslationMovesEveryPoint) {
  const Polyline p = Polyline::with_translation(square_points(), Polyline::single_loop(4), Vec2(0.5, 0.0));
  EXPECT_EQ(p.num_params(), 2);
  EXPECT_TRUE(p.contains(Vec2(1.2, 0.0)));
  const auto q = p.closest(Vec2(1.4, 0.2));
  const auto vn = p.normal_velocity(q);
  ASSERT_EQ(vn.size(), 1u);
  EXPECT_EQ(vn[0].first, 0);
  EXPECT_NEAR(vn[0].second, 1.0, 1e-15);
}

TEST(Bezier, CircleDistanceWithinFlattening) {
  const BezierChain c = bezier_circle();
  const Vec2 x(0.25, 0.0);
  // brute force over dense parameter samples of the exact curves
  double best = kInf;
  for (int i = 0; i < c.num_curves(); ++i)
    for (int k = 0; k <= 20000; ++k) best = std::min(best, (bezier_point(c.controls(i), k / 20000.0) - x).norm());
  const auto q = c.closest(x);
  EXPECT_NEAR(q.distance, best, 1e-5);
  EXPECT_NEAR(q.distance, 0.75, 1e-3);  // cubic circle approximation error
  EXPECT_TRUE(c.contains(x));
  EXPECT_FALSE(c.contains(Vec2(1.1, 0.0)));
}

TEST(Bezier, ArclengthSamplingIsUniform) {
  const BezierChain c = bezier_circle();
  // arclength tables by dense midpoint quadrature
  const int n = 4000;
  std::vector<std::vector<double>> table(c.num_curves(), std::vector<double>(n + 1, 0.0));
  std::vector<double> offset(c.num_curves() + 1, 0.0);
  for (int i = 0; i < c.num_curves(); ++i) {
    for (int k = 0; k < n; ++k)
      table[i][k + 1] = table[i][k] + bezier_d1(c.controls(i), (k + 0.5) / n).norm() / n;
    offset[i + 1] = offset[i] + table[i][n];
  }
  const double total = offset.back();
  EXPECT_NEAR(c.perimeter(), total, 1e-4);
  const int bins = 20, samples = 10000;
  std::vector<int> hist(bins, 0);
  CounterRng rng(8);
  for (int s = 0; s < samples; ++s) {
    const auto b = c.sample_boundary(rng);
    const int i = b.query.primitive;
    const double t = b.query.local * n;
    const int k = std::min(static_cast<int>(t), n - 1);
    const double sarc = offset[i] + table[i][k] + (t - k) * (table[i][k + 1] - table[i][k]);
    hist[std::min(bins - 1, static_cast<int>(sarc / total * bins))]++;
    EXPECT_NEAR(b.pdf, 1.0 / c.perimeter(), 1e-12);
  }
  double chi2 = 0.0;
  const double expected = static_cast<double>(samples) / bins;
  for (int h : hist) chi2 += (h - expected) * (h - expected) / expected;
  EXPECT_LT(chi2, 43.82);  // chi^2_{19}, p = 0.001
}

TEST(Bezier, CurvatureClosedFormMatchesTangentAngle) {
  const std::array<Vec2, 4> p{Vec2(0, 0), Vec2(1, 0), Vec2(2, 1), Vec2(3, 1)};
  const double h = 1e-4;
  auto angle = [&](double t) {
    const Vec2 d = bezier_d1(p, t);
    return std::atan2(d.y(), d.x());
  };
  const double fd = (angle(h) - angle(-h)) / (2.0 * h) / bezier_d1(p, 0.0).norm();
  EXPECT_NEAR(bezier_curvature(p, 0.0), fd, 1e-6);
  const std::array<Vec2, 4> line{Vec2(0, 0), Vec2(1, 1), Vec2(2, 2), Vec2(3, 3)};
  EXPECT_EQ(bezier_curvature(line, 0.3), 0.0);
}

TEST(Bezier, CircleCurvatureNearOne) {
  const BezierChain c = bezier_circle();
  const auto q = c.closest(Vec2(0.3, 0.2));
  EXPECT_NEAR(c.curvature(q), 1.0, 2e-3);
}

TEST(Bezier, ColinearHandlesStaySmooth) {
  BezierChain c = bezier_circle(4);
  std::vector<double> p(c.params().begin(), c.params().end());
  p[2] *= 1.5;  // anchor 0 outgoing handle x
  p[3] += 0.2;
  c.set_params(p);
  const Vec2 out = c.controls(0)[1] - c.controls(0)[0];
  const Vec2 in = c.controls(3)[2] - c.controls(3)[3];
  EXPECT_NEAR(cross(out, in), 0.0, 1e-14);
  EXPECT_LT(out.dot(in), 0.0);
}

TEST(Monopoles, SingleMonopoleBallIsEmpty) {
  ImplicitMonopoles<3> m(-1.0, {{1.0, {0.0, 0.0, 0.0}}}, Box<3>{Vec3(-2, -2, -2), Vec3(2, 2, 2)});
  const Vec3 x(0.5, 0.0, 0.0);
  EXPECT_NEAR(m.value(x), 1.0, 1e-15);
  const auto s = m.step(x, 1e-4);
  EXPECT_FALSE(s.terminated);
  EXPECT_GT(s.radius, 0.0);
  EXPECT_LE(s.radius, 0.5 + 1e-12);
  CounterRng rng(3);
  for (int i = 0; i < 2000; ++i) EXPECT_GT(m.value(sample_ball<3>(rng, x, s.radius)), 0.0);
}

TEST(Monopoles, TerminatesInShell) {
  ImplicitMonopoles<3> m(-1.0, {{1.0, {0.0, 0.0, 0.0}}}, Box<3>{Vec3(-2, -2, -2), Vec3(2, 2, 2)});
  const Vec3 x(0.9999, 0.0, 0.0);  // |h| / |grad h| ~ 1e-4
  EXPECT_TRUE(m.step(x, 1e-3).terminated);
  EXPECT_FALSE(m.step(x, 1e-5).terminated);
}

TEST(Monopoles, PositiveFieldNeverTerminates) {
  ImplicitMonopoles<2> m(0.5, {{1.0, {0.0, 0.0}}}, Box2{Vec2(-2, -2), Vec2(2, 2)});
  double last = 0.0;
  for (double r : {0.5, 1.0, 2.0, 4.0}) {
    const auto s = m.step(Vec2(r, 0.0), 1e-3);
    EXPECT_FALSE(s.terminated);
    EXPECT_GT(s.radius, last);
    last = s.radius;
  }
}

TEST(Monopoles, ScaleVelocityOnZeroSet) {
  ImplicitMonopoles<3> m(-1.0, {{1.0, {0.0, 0.0, 0.0}}}, Box<3>{Vec3(-2, -2, -2), Vec3(2, 2, 2)});
  const auto q = m.closest(Vec3(0.999, 0.0, 0.0));
  EXPECT_NEAR(q.closest.norm(), 1.0, 1e-10);
  double vn = 0.0;
  for (auto [k, v] : m.normal_velocity(q))
    if (k == 1) vn = v;
  EXPECT_NEAR(vn, 1.0, 1e-9);
  EXPECT_NEAR(std::abs(m.curvature(q)), 2.0, 1e-6);  // mean curvature sum of the unit sphere
}

TEST(Monopoles, TwoDimensionalCircle) {
  ImplicitMonopoles<2> m(-1.0, {{0.5, {0.0, 0.0}}}, Box2{Vec2(-1, -1), Vec2(1, 1)});
  const auto q = m.closest(Vec2(0.3, 0.1));
  EXPECT_NEAR(q.closest.norm(), 0.5, 1e-10);
  EXPECT_NEAR(std::abs(m.curvature(q)), 2.0, 1e-6);
  EXPECT_NEAR(m.level_distance(Vec2(0.25, 0.0)), 1.0 / 0.5 * 0.25 * 0.25 * 1.0, 1e-12);
  EXPECT_THROW(m.perimeter(), UnsupportedError);
}

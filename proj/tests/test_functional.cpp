#include "dwos/functional/functional.hpp"
#include "scenes.hpp"

#include "dwos/geometry/bezier.hpp"
#include "dwos/geometry/monopoles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace dwos;
using namespace dwos::testing;

TEST(Loss, ValuesAndDerivatives) {
  Loss sq;
  EXPECT_DOUBLE_EQ(sq.value(3.0), 4.5);
  EXPECT_DOUBLE_EQ(sq.derivative(-2.0), -2.0);
  Loss l1{LossKind::L1Smooth, 0.1, {}};
  EXPECT_NEAR(l1.value(0.0), 0.0, 1e-15);
  EXPECT_NEAR(l1.derivative(10.0), 1.0, 1e-4);
  Loss tab{LossKind::Table, 0.0, {{-1.0, 1.0}, {0.0, 0.0}, {2.0, 4.0}}};
  EXPECT_DOUBLE_EQ(tab.value(1.0), 2.0);
  EXPECT_DOUBLE_EQ(tab.value(-2.0), 2.0);
  EXPECT_DOUBLE_EQ(tab.derivative(0.5), 2.0);
  Loss bad{LossKind::Table, 0.0, {{0.0, 0.0}}};
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_THROW(parse_loss_kind("cubic"), ConfigError);
}

TEST(Product, PairwiseDefinition) {
  const std::vector<double> u{1.0, 3.0}, du{2.0, 4.0};
  EXPECT_DOUBLE_EQ(product_estimate(u, du, {ProductKind::UStat, 8}), 5.0);
  EXPECT_DOUBLE_EQ(product_estimate(u, du, {ProductKind::Correlated, 8}), 6.0);
  EXPECT_DOUBLE_EQ(product_estimate(u, du, {ProductKind::Uncorrelated, 8}), 4.0);
}

TEST(Product, BatchesAndRemainder) {
  // batch 2 over 5 samples: {1, 2} and {3, 4, 5}, each batch weighted 1/2
  const std::vector<double> u{1, 2, 3, 4, 5};
  const auto w = product_weights(u, {ProductKind::UStat, 2});
  const std::vector<double> expected{0.5, 0.25, 0.75, 2.0 / 3.0, 7.0 / 12.0};
  for (int m = 0; m < 5; ++m) EXPECT_DOUBLE_EQ(w[m], expected[m]) << m;
  EXPECT_THROW(product_weights(std::vector<double>{1.0}, {ProductKind::UStat, 8}), ConfigError);
}

TEST(Product, SyntheticBias) {
  // du = u + noise: Cov(u, du) = s^2, so the correlated estimator is biased by s^2 / n
  const double a = 1.5, s = 1.0, b = 1.5;
  const int n = 4, trials = 10000;
  RunningStats ust, cor, unc;
  CounterRng rng(17);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    std::vector<double> u(n), du(n);
    for (int m = 0; m < n; ++m) {
      u[m] = a + s * N(rng);
      du[m] = b - a + u[m] + 0.5 * N(rng);
    }
    ust.push(product_estimate(u, du, {ProductKind::UStat, 8}));
    cor.push(product_estimate(u, du, {ProductKind::Correlated, 8}));
    unc.push(product_estimate(u, du, {ProductKind::Uncorrelated, 8}));
  }
  EXPECT_NEAR(ust.mean, a * b, 3.0 * ust.stderr_mean());
  EXPECT_NEAR(unc.mean, a * b, 3.0 * unc.stderr_mean());
  EXPECT_NEAR(cor.mean, a * b + s * s / n, 3.0 * cor.stderr_mean());
  EXPECT_GT(std::abs(cor.mean - a * b), 5.0 * cor.stderr_mean());
  EXPECT_LE(ust.variance(), unc.variance());
}

TEST(Stratified, OnePointPerCell) {
  const Box2 box{Vec2(0, 0), Vec2(2, 1)};
  const auto pts = stratified_points<2>(box, 100, CounterRng(3));
  ASSERT_EQ(pts.size(), 100u);
  std::vector<int> cells(100, 0);
  for (const auto& p : pts) {
    ASSERT_TRUE(box.contains(p));
    cells[static_cast<int>(p.y() * 10) * 10 + static_cast<int>(p.x() / 2 * 10)]++;
  }
  for (int c : cells) EXPECT_EQ(c, 1);
}

TEST(Functional, SelfTargetIsZero) {
  const auto s = disk_restricted(poly2({{"x", 1.0}, {"xy", 1.0}}));
  FunctionalSpec<2> spec;
  spec.reference = poly2({{"x", 1.0}, {"xy", 1.0}});
  spec.interior_samples = 64;
  SolverConfig cfg;
  cfg.walks = 8;
  RunningStats st;
  for (int seed = 0; seed < 30; ++seed) {
    cfg.seed = seed;
    st.push(estimate_functional(s, spec, cfg).value);
  }
  EXPECT_NEAR(st.mean, 0.0, 3.0 * st.stderr_mean());
}

TEST(Functional, ConstantSolutionOverDisk) {
  const Scene<SphereSet<2>> s(disk(), 0.0, ScalarField<2>::zero(), DataModel<2>::constant({1.0}));
  FunctionalSpec<2> spec;
  spec.interior_samples = 4096;
  SolverConfig cfg;
  cfg.walks = 2;
  RunningStats st;
  for (int seed = 0; seed < 10; ++seed) {
    cfg.seed = seed;
    st.push(estimate_functional(s, spec, cfg).value);
  }
  EXPECT_NEAR(st.mean, kPi / 2.0, std::max(3.0 * st.stderr_mean(), 1e-3));
}

TEST(Functional, BoundaryTermIsPerimeter) {
  const Scene<SphereSet<2>> s(disk(), 0.0, ScalarField<2>::zero(), DataModel<2>::constant({0.0}));
  FunctionalSpec<2> spec;
  spec.interior_samples = 4;
  spec.boundary = FunctionalSpec<2>::BoundaryLoss{Loss{LossKind::Table, 0.0, {{-1.0, 1.0}, {1.0, 1.0}}}, {}, {}};
  SolverConfig cfg;
  cfg.walks = 2;
  EXPECT_NEAR(estimate_functional(s, spec, cfg).boundary, 2.0 * kPi, 1e-12);
}

TEST(FunctionalGradient, FrozenSceneIsZero) {
  auto s = bowl_scene(Vec2(0.1, 0.0), 0.5);
  for (int k = 0; k < s.num_params(); ++k) s.freeze(k);
  FunctionalSpec<2> spec;
  spec.interior_samples = 64;
  SolverConfig cfg;
  cfg.walks = 4;
  const auto g = functional_gradient(s, spec, cfg, ProductConfig{});
  for (double v : g.grad) EXPECT_EQ(v, 0.0);
}

TEST(FunctionalGradient, NeedsTwoWalks) {
  const auto s = bowl_scene(Vec2(0.0, 0.0), 0.5);
  SolverConfig cfg;
  cfg.walks = 1;
  EXPECT_THROW(functional_gradient(s, FunctionalSpec<2>{}, cfg, ProductConfig{}), ConfigError);
}

TEST(FunctionalGradient, TranslationDescends) {
  const Box2 box{Vec2(-1, -1), Vec2(1, 1)};
  const Vec2 target(0.15, 0.0);
  const auto s = bowl_scene(Vec2(0.0, 0.0), 0.5);
  FunctionalSpec<2> spec;
  spec.reference = ScalarField<2>::table(tabulate([&](const Vec2& x) { return bowl(x, target, 0.5); }, box));
  spec.region = box;
  spec.outside_value = 0.0;
  spec.interior_samples = 256;
  SolverConfig cfg;
  cfg.walks = 8;
  RunningStats gx;
  for (int seed = 0; seed < 12; ++seed) {
    cfg.seed = seed;
    gx.push(functional_gradient(s, spec, cfg, ProductConfig{}).grad[0]);
  }
  EXPECT_LT(gx.mean + 3.0 * gx.stderr_mean(), 0.0);
}

TEST(FunctionalGradient, MatchesFiniteDifferences) {
  const Box2 box{Vec2(-1, -1), Vec2(1, 1)};
  const Vec2 target(0.1, -0.05);
  const auto s = bowl_scene(Vec2(0.0, 0.0), 0.5);
  FunctionalSpec<2> spec;
  spec.reference = ScalarField<2>::table(tabulate([&](const Vec2& x) { return bowl(x, target, 0.45); }, box));
  spec.region = box;
  spec.outside_value = 0.0;
  spec.interior_samples = 256;
  SolverConfig cfg;
  cfg.walks = 8;
  const auto a = gradient_vs_fd(s, spec, cfg, ProductConfig{}, 16, 1e-3, {0, 1, 2});
  for (int k : {0, 1, 2}) EXPECT_TRUE(a.agrees(k)) << k << ": " << a.grad[k].mean << " +- " << a.grad[k].stderr_mean()
                                                   << " vs " << a.fd[k].mean << " +- " << a.fd[k].stderr_mean();
}

TEST(FunctionalGradient, LengthRegularizerOnCircle) {
  const Scene<SphereSet<2>> s(disk(0.7), 0.0, ScalarField<2>::zero(), DataModel<2>::constant({0.0}));
  const auto g = length_regularizer_gradient(s, 0.3, 64, 1);
  EXPECT_NEAR(g[2], 0.3 * 2.0 * kPi, 1e-12);
  EXPECT_NEAR(g[0], 0.0, 0.3);
}

TEST(FunctionalGradient, LengthRegularizerStraightBezier) {
  // a square drawn with straight cubic pieces: curvature vanishes everywhere
  std::vector<BezierAnchor> a;
  const std::vector<Vec2> corners{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  for (int i = 0; i < 4; ++i) {
    const Vec2 next = corners[(i + 1) % 4] - corners[i], prev = corners[(i + 3) % 4] - corners[i];
    a.push_back({corners[i], next / 3.0, prev / 3.0, false});
  }
  const Scene<BezierChain> s(BezierChain(a, {{0, 1, 2, 3}}), 0.0, ScalarField<2>::zero(), DataModel<2>::constant({0.0}));
  for (double v : length_regularizer_gradient(s, 1.0, 256, 2)) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(FunctionalGradient, LengthRegularizerMatchesArclengthFd) {
  std::vector<BezierAnchor> a;
  for (int i = 0; i < 5; ++i) {
    const double th = 2.0 * kPi * i / 5;
    const double r = 1.0 + 0.2 * std::cos(2.0 * th);
    a.push_back({r * Vec2(std::cos(th), std::sin(th)), 0.4 * Vec2(-std::sin(th), std::cos(th)), std::nullopt, true});
  }
  const BezierChain c(a, {{0, 1, 2, 3, 4}});
  auto arclength = [](const BezierChain& b) {
    double L = 0.0;
    const int n = 20000;
    for (int i = 0; i < b.num_curves(); ++i)
      for (int k = 0; k < n; ++k) L += bezier_d1(b.controls(i), (k + 0.5) / n).norm() / n;
    return L;
  };
  const Scene<BezierChain> s(c, 0.0, ScalarField<2>::zero(), DataModel<2>::constant({0.0}));
  for (int k : {0, 3, 7}) {
    std::vector<double> p(c.params().begin(), c.params().end());
    const double h = 1e-5;
    p[k] += h;
    BezierChain plus = c;
    plus.set_params(p);
    p[k] -= 2 * h;
    BezierChain minus = c;
    minus.set_params(p);
    const double fd = (arclength(plus) - arclength(minus)) / (2 * h);
    RunningStats st;
    for (int rep = 0; rep < 40; ++rep) st.push(length_regularizer_gradient(s, 1.0, 250, rep)[k]);  // 10^4 samples
    EXPECT_NEAR(st.mean, fd, 3.0 * st.stderr_mean()) << k;
  }
}

namespace {

// h = c + a / |x| with a = 0.5, c = -1: circle of radius 0.5. v_n for the offset parameter is
// 1 / |grad h| = r^2 / a = 0.5. Reference 1 and data 0 give F = L(-1) = 1/2 on the boundary.
double band_estimate(double band) {
  const Scene<Monopoles> s(Monopoles(-1.0, {{0.5, {0.0, 0.0}}}, Box2{Vec2(-1, -1), Vec2(1, 1)}), 0.0,
                           ScalarField<2>::zero(), DataModel<2>::constant({0.0}));
  FunctionalSpec<2> spec;
  spec.reference = ScalarField<2>::constant_value(1.0);
  spec.band_samples = 400000;
  return implicit_boundary_band_gradient(s, spec, band, SolverConfig{})[0];
}

}  // namespace

TEST(ImplicitBand, CircleBoundaryTerm) {
  const double exact = 2.0 * kPi * 0.5 * 0.5 * 0.5;
  const double e4 = band_estimate(4e-2), e2 = band_estimate(2e-2), e1 = band_estimate(1e-2);
  EXPECT_NEAR(e1, exact, 0.1 * exact);
  EXPECT_GE(std::abs(e4 - exact), std::abs(e2 - exact));
  EXPECT_GE(std::abs(e2 - exact), std::abs(e1 - exact));
}

TEST(ImplicitBand, FrozenIsZero) {
  Scene<Monopoles> s(Monopoles(-1.0, {{0.5, {0.0, 0.0}}}, Box2{Vec2(-1, -1), Vec2(1, 1)}), 0.0, ScalarField<2>::zero(),
                     DataModel<2>::constant({0.0}));
  for (int k = 0; k < s.num_params(); ++k) s.freeze(k);
  FunctionalSpec<2> spec;
  spec.reference = ScalarField<2>::constant_value(1.0);
  for (double v : implicit_boundary_band_gradient(s, spec, 1e-2, SolverConfig{})) EXPECT_EQ(v, 0.0);
}

TEST(ImplicitBand, UnsupportedTerms) {
  const Scene<Monopoles> s(Monopoles(-1.0, {{0.5, {0.0, 0.0}}}, Box2{Vec2(-1, -1), Vec2(1, 1)}), 0.0,
                           ScalarField<2>::zero(), DataModel<2>::constant({0.0}));
  FunctionalSpec<2> spec;
  spec.regularizers.push_back({"length", 1.0});
  SolverConfig cfg;
  cfg.walks = 2;
  EXPECT_THROW(functional_gradient(s, spec, cfg, ProductConfig{}), UnsupportedError);
}

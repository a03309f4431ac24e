#include "dwos/optim/optimize.hpp"
#include "scenes.hpp"

#include <gtest/gtest.h>

using namespace dwos;
using namespace dwos::testing;

TEST(Schedule, Endpoints) {
  EXPECT_EQ(wpp_schedule(0, 2, 64, 200), 2);
  EXPECT_EQ(wpp_schedule(200, 2, 64, 200), 64);
  EXPECT_EQ(wpp_schedule(100, 2, 64, 200), 11);
  for (int t = 0; t <= 50; ++t) EXPECT_EQ(wpp_schedule(t, 8, 8, 50), 8);
  int last = 0;
  for (int t = 0; t <= 200; ++t) {
    EXPECT_GE(wpp_schedule(t, 2, 64, 200), last);
    last = wpp_schedule(t, 2, 64, 200);
  }
}

TEST(Schedule, RegularizerDecay) {
  EXPECT_DOUBLE_EQ(regularizer_decay(0.3, 2, 2), 0.3);
  EXPECT_DOUBLE_EQ(regularizer_decay(0.3, 8, 2), 0.15);
  EXPECT_DOUBLE_EQ(regularizer_decay(0.3, 5, 5), 0.3);
}

TEST(Adam, ZeroGradientKeepsParams) {
  Adam adam(3);
  std::vector<double> p{1.0, -2.0, 0.5};
  const auto before = p;
  for (int i = 0; i < 5; ++i) adam.step(p, std::vector<double>(3, 0.0), AdamConfig{});
  EXPECT_EQ(p, before);
}

TEST(Adam, FirstStep) {
  Adam adam(2);
  AdamConfig cfg;
  cfg.lr = 0.1;
  std::vector<double> p{0.0, 0.0};
  const std::vector<double> g{3.0, -1e-3};
  adam.step(p, g, cfg);
  EXPECT_NEAR(p[0], -0.1 * 3.0 / (3.0 + cfg.eps), 1e-15);
  EXPECT_NEAR(p[1], -0.1 * -1e-3 / (1e-3 + cfg.eps), 1e-12);
}

TEST(Adam, VectorAdamKeepsDirection) {
  const std::vector<ParamInfo> layout{{"vertex[0].x", "position", 0}, {"vertex[0].y", "position", 1}, {"data", "data", 0}};
  const auto groups = vector_groups(layout);
  EXPECT_EQ(groups, (std::vector<int>{0, 0, -1}));
  Adam adam(3, groups);
  std::vector<double> p{0.0, 0.0, 0.0};
  adam.step(p, std::vector<double>{3.0, 0.5, 1.0}, AdamConfig{});
  EXPECT_NEAR(p[0] / p[1], 6.0, 1e-9);
  // scalar Adam would move both coordinates by lr
  EXPECT_NEAR(std::hypot(p[0], p[1]), 1e-3, 1e-9);
}

TEST(Adam, NonFiniteEntriesSkipped) {
  Adam adam(2);
  std::vector<double> p{0.0, 0.0};
  adam.step(p, std::vector<double>{std::nan(""), 1.0}, AdamConfig{});
  EXPECT_EQ(p[0], 0.0);
  EXPECT_LT(p[1], 0.0);
  EXPECT_EQ(adam.skipped(), 1);
}

namespace {

struct Problem {
  Scene<SphereSet<2>> scene;
  FunctionalSpec<2> spec;
};

Problem translation_problem(Vec2 start, Vec2 target) {
  const Box2 box{Vec2(-1, -1), Vec2(1, 1)};
  Problem p{bowl_scene(start, 0.5), {}};
  p.scene.freeze(2);
  p.spec.reference = ScalarField<2>::table(tabulate([&](const Vec2& x) { return bowl(x, target, 0.5); }, box));
  p.spec.region = box;
  p.spec.outside_value = 0.0;
  p.spec.interior_samples = 256;
  return p;
}

}  // namespace

TEST(Optimize, DeterministicLog) {
  auto a = translation_problem(Vec2(0, 0), Vec2(0.1, 0.1));
  auto b = a;
  OptimizerConfig o;
  o.iterations = 15;
  o.adam.lr = 1e-2;
  o.seed = 4;
  const auto ra = optimize(a.scene, a.spec, SolverConfig{}, ProductConfig{}, o);
  const auto rb = optimize(b.scene, b.spec, SolverConfig{}, ProductConfig{}, o);
  ASSERT_EQ(ra.log.size(), rb.log.size());
  for (std::size_t i = 0; i < ra.log.size(); ++i) {
    EXPECT_EQ(ra.log[i].loss, rb.log[i].loss);
    EXPECT_EQ(ra.log[i].grad_norm, rb.log[i].grad_norm);
    EXPECT_EQ(ra.log[i].param_hash, rb.log[i].param_hash);
  }
  EXPECT_EQ(ra.params, rb.params);
  EXPECT_EQ(ra.params[2], 0.5);  // frozen radius
}

TEST(Optimize, SelfTargetStaysPut) {
  auto p = translation_problem(Vec2(0.05, 0), Vec2(0.05, 0));
  OptimizerConfig o;
  o.iterations = 60;
  o.adam.lr = 2e-3;
  const auto r = optimize(p.scene, p.spec, SolverConfig{}, ProductConfig{}, o);
  EXPECT_LT((Vec2(r.params[0], r.params[1]) - Vec2(0.05, 0)).norm(), 0.03);
}

TEST(Optimize, RecoversTranslation) {
  auto p = translation_problem(Vec2(-0.1, 0.05), Vec2(0.1, -0.05));
  OptimizerConfig o;
  o.iterations = 200;
  o.adam.lr = 5e-3;
  o.wpp0 = 2;
  o.wppT = 64;
  o.seed = 1;
  const auto r = optimize(p.scene, p.spec, SolverConfig{}, ProductConfig{}, o);
  SolverConfig eval;
  eval.walks = 64;
  FunctionalSpec<2> dense = p.spec;
  dense.interior_samples = 4096;
  auto start = translation_problem(Vec2(-0.1, 0.05), Vec2(0.1, -0.05));
  const double j0 = estimate_functional(start.scene, dense, eval).value;
  const double j1 = estimate_functional(p.scene, dense, eval).value;
  EXPECT_LE(j1, 0.05 * j0) << j0 << " -> " << j1;
  EXPECT_LT((Vec2(r.params[0], r.params[1]) - Vec2(0.1, -0.05)).norm(), 0.03);
}

TEST(Optimize, TimeBudgetStopsEarly) {
  auto p = translation_problem(Vec2(0, 0), Vec2(0.1, 0.1));
  OptimizerConfig o;
  o.iterations = 100000;
  o.time_budget = 0.2;
  const auto r = optimize(p.scene, p.spec, SolverConfig{}, ProductConfig{}, o);
  EXPECT_LT(r.log.size(), 100000u);
  EXPECT_GE(r.log.back().seconds, 0.2);
}

TEST(Optimize, CsvLog) {
  std::vector<IterationRecord> log{{0, 1.5, 2.0, 2, 0.1, 0, false}};
  std::ostringstream os;
  write_log_csv(os, log);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,loss,grad_norm,wpp,seconds");
}

TEST(Optimize, PolylineResamplingKeepsShape) {
  const auto pts = circle_points(24, 0.4);
  Scene<Polyline> s(Polyline::with_vertex_params(pts, Polyline::single_loop(pts.size())), 0.0,
                    ScalarField<2>::constant_value(4.0), DataModel<2>::constant({0.0}));
  FunctionalSpec<2> spec;
  spec.reference = ScalarField<2>::constant_value(-0.1);
  spec.interior_samples = 64;
  OptimizerConfig o;
  o.iterations = 12;
  o.resample_every = 5;
  o.smoothing = 0.5;
  o.adam.lr = 1e-3;
  EXPECT_NO_THROW(optimize(s, spec, SolverConfig{}, ProductConfig{}, o));
  EXPECT_GT(s.geometry.num_anchors(), 3);
  EXPECT_TRUE(s.geometry.contains(Vec2(0, 0)));
  Scene<SphereSet<2>> d = bowl_scene(Vec2(0, 0), 0.5);
  FunctionalSpec<2> ds;
  EXPECT_THROW(optimize(d, ds, SolverConfig{}, ProductConfig{}, o), ConfigError);
}

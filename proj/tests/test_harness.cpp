#include "dwos/harness/ablation.hpp"
#include "scenes.hpp"

#include <gtest/gtest.h>

using namespace dwos;
using namespace dwos::testing;

namespace {

std::vector<Vec2> eval_points(int n) { return circle_points(n, 0.15, Vec2(0.5, 0.5)); }

std::vector<double> reference_dy(const std::vector<Vec2>& pts) {
  std::vector<double> r;
  for (const auto& p : pts) r.push_back(ablation_reference_dy(p));
  return r;
}

}  // namespace

TEST(AblationScene, ReferenceIsConsistent) {
  const auto s = make_ablation_scene(100);
  EXPECT_EQ(s.num_params(), 2);
  EXPECT_TRUE(s.geometry.contains(Vec2(0.5, 0.5)));
  SolverConfig cfg;
  cfg.walks = 4000;
  const Vec2 x(0.55, 0.4);
  const auto g = diff_mean(x, s, cfg);
  EXPECT_NEAR(g.u, ablation_solution(x), 0.02);
  EXPECT_NEAR(g.mean[1], ablation_reference_dy(x), std::max(0.05, 4.0 * g.stderr_[1]));
  EXPECT_NEAR(g.mean[0], -(2.0 * x.x() + 1.0), std::max(0.05, 4.0 * g.stderr_[0]));
}

TEST(RmseSweep, DecompositionAndDeterminism) {
  const auto s = make_ablation_scene(60);
  const auto pts = eval_points(4);
  SweepConfig sc;
  sc.param = 1;
  sc.seeds = 4;
  sc.solver.walks = 16;
  const auto a = rmse_sweep(s, AblationAxis::Offset, {1, 10}, pts, reference_dy(pts), sc);
  const auto b = rmse_sweep(s, AblationAxis::Offset, {1, 10}, pts, reference_dy(pts), sc);
  ASSERT_EQ(a.levels.size(), 2u);
  for (std::size_t l = 0; l < 2; ++l) {
    const auto& L = a.levels[l];
    EXPECT_NEAR(L.rmse * L.rmse, L.bias * L.bias + L.variance, 1e-9 * L.rmse * L.rmse);
    EXPECT_EQ(L.rmse, b.levels[l].rmse);
    EXPECT_EQ(L.walks, 4L * 4 * 16);
  }
  std::ostringstream csv, lng;
  write_report_csv(csv, a);
  write_report_long(lng, a);
  EXPECT_NE(csv.str().find("offset"), std::string::npos);
  EXPECT_NE(lng.str().find("rmse"), std::string::npos);
}

TEST(RmseSweep, EpsilonBiasGrows) {
  const auto s = make_ablation_scene(100);
  const auto pts = eval_points(8);
  SweepConfig sc;
  sc.param = 1;
  sc.seeds = 32;
  sc.solver.walks = 512;
  const auto r = rmse_sweep(s, AblationAxis::Epsilon, {1e-3, 1e-2, 1e-1}, pts, reference_dy(pts), sc);
  const auto& L = r.levels;
  for (std::size_t l = 1; l < L.size(); ++l)
    EXPECT_GE(L[l].bias_corrected + 2.0 * (L[l].bias_stderr + L[l - 1].bias_stderr), L[l - 1].bias_corrected) << l;
  EXPECT_GT(L.back().bias_corrected - 2.0 * L.back().bias_stderr, L.front().bias_corrected);
  for (const auto& l : L) EXPECT_LE(l.bias_corrected, l.bias);
}

TEST(RmseSweep, RejectsBadInput) {
  const auto s = make_ablation_scene(40);
  SweepConfig sc;
  EXPECT_THROW(rmse_sweep(s, AblationAxis::Wpp, {4}, {}, {}, sc), ConfigError);
  sc.param = 5;
  const auto pts = eval_points(2);
  EXPECT_THROW(rmse_sweep(s, AblationAxis::Wpp, {4}, pts, reference_dy(pts), sc), ConfigError);
  EXPECT_THROW(parse_axis("temperature"), ConfigError);
}

TEST(EqualTime, ZeroBudgetIsEmpty) {
  const auto s = make_ablation_scene(40);
  const auto pts = eval_points(2);
  const auto r = equal_time_comparison(s, pts, {{0, 0}, {0, 0}}, 0.0, SolverConfig{});
  EXPECT_TRUE(r.methods.empty());
}

TEST(EqualTime, SingleParameterComparable) {
  auto s = make_ablation_scene(60);
  s.freeze(0);
  const auto pts = eval_points(4);
  std::vector<std::vector<double>> ref;
  for (const auto& p : pts) ref.push_back({-(2.0 * p.x() + 1.0), ablation_reference_dy(p)});
  const auto r = equal_time_comparison(s, pts, ref, 0.5, SolverConfig{}, 2e-3);
  ASSERT_EQ(r.methods.size(), 2u);
  const double a = r.methods[0].rmse, b = r.methods[1].rmse;
  EXPECT_LT(std::max(a, b), 2.0 * std::min(a, b)) << a << " " << b;
  std::ostringstream os;
  write_comparison_csv(os, r);
  EXPECT_NE(os.str().find("finite_difference"), std::string::npos);
}

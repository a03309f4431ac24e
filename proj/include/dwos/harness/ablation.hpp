#pragma once

#include "dwos/core/parallel.hpp"
#include "dwos/core/stats.hpp"
#include "dwos/functional/product.hpp"
#include "dwos/geometry/polyline.hpp"
#include "dwos/solver/differential.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace dwos {

enum class AblationAxis { Epsilon, Offset, Estimator, Method, Wpp };

inline AblationAxis parse_axis(const std::string& s) {
  if (s == "epsilon") return AblationAxis::Epsilon;
  if (s == "offset") return AblationAxis::Offset;
  if (s == "estimator") return AblationAxis::Estimator;
  if (s == "method") return AblationAxis::Method;
  if (s == "wpp") return AblationAxis::Wpp;
  throw ConfigError("unknown ablation axis '" + s + "'");
}
inline const char* to_string(AblationAxis a) {
  switch (a) {
    case AblationAxis::Epsilon: return "epsilon";
    case AblationAxis::Offset: return "offset";
    case AblationAxis::Estimator: return "estimator";
    case AblationAxis::Method: return "method";
    case AblationAxis::Wpp: return "wpp";
  }
  return "";
}

struct AblationLevel {
  double level = 0.0;
  std::string label;
  double rmse = 0.0;
  double bias = 0.0;      // root mean square over points of (mean over seeds - reference)
  double variance = 0.0;  // mean over points of the population variance over seeds
  double bias_stderr = 0.0;
  double bias_corrected = 0.0;  // bias with the seed-noise share of the mean removed
  long walks = 0;
  double seconds = 0.0;
};

struct AblationReport {
  std::string axis;
  std::string reference;
  std::vector<AblationLevel> levels;
};

/// Sweep settings. Levels are read per axis as:
///   epsilon: shell size (offset follows at 10 epsilon unless solver.offset is set)
///   offset:  c as a multiple of solver.epsilon
///   estimator: 0 uncorrelated, 1 correlated, 2 ustat; the target is u * du_k
///   method: 0 backward, 1 offset ball
///   wpp: walks per point
struct SweepConfig {
  SolverConfig solver;
  ProductConfig product;
  int param = 0;   // parameter whose derivative is measured
  int seeds = 16;
  std::uint64_t seed = 0;
  std::string reference = "analytic";
};

namespace detail {

template <class G>
double sweep_sample(const Scene<G>& scene, const Vec<G::dim>& x, std::size_t point, const SolverConfig& cfg,
                    AblationAxis axis, const ProductConfig& pcfg, int param) {
  if (axis != AblationAxis::Estimator) return diff_mean(x, scene, cfg, point).mean[param];
  std::vector<double> u(cfg.walks), du(cfg.walks);
  for (int j = 0; j < cfg.walks; ++j) {
    CounterRng rng = walk_rng(cfg.seed, point, j);
    const CoupledEstimate e = diff_wos(x, scene, cfg, rng);
    u[j] = e.u;
    du[j] = e.du[param];
  }
  return product_estimate(u, du, pcfg);
}

}  // namespace detail

/// RMSE of a derivative estimate over evaluation points, per level of one hyperparameter, split
/// into bias and variance over `seeds` repetitions: rmse^2 = bias^2 + variance exactly.
template <class G>
AblationReport rmse_sweep(const Scene<G>& scene, AblationAxis axis, const std::vector<double>& levels,
                          const std::vector<Vec<G::dim>>& points, const std::vector<double>& reference,
                          const SweepConfig& sc) {
  if (points.size() != reference.size()) throw ConfigError("sweep: reference size mismatch");
  if (points.empty()) throw ConfigError("sweep: no evaluation points");
  if (sc.seeds < 2) throw ConfigError("sweep: need at least 2 seeds");
  if (sc.param < 0 || sc.param >= scene.num_params()) throw ConfigError("sweep: parameter out of range");
  AblationReport report{to_string(axis), sc.reference, {}};
  const std::size_t np = points.size(), ns = sc.seeds;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    const double level = levels[li];
    SolverConfig cfg = sc.solver;
    ProductConfig pcfg = sc.product;
    AblationLevel out;
    out.level = level;
    switch (axis) {
      case AblationAxis::Epsilon:
        cfg.epsilon = level;
        out.label = "eps=" + std::to_string(level);
        break;
      case AblationAxis::Offset:
        cfg.offset = level * cfg.epsilon;
        out.label = "c=" + std::to_string(level) + "eps";
        break;
      case AblationAxis::Estimator:
        pcfg.kind = static_cast<ProductKind>(static_cast<int>(level));
        out.label = to_string(pcfg.kind);
        break;
      case AblationAxis::Method:
        cfg.method = level == 0.0 ? NormalMethod::Backward : NormalMethod::OffsetBall;
        out.label = to_string(cfg.method);
        break;
      case AblationAxis::Wpp:
        cfg.walks = static_cast<int>(level);
        out.label = "wpp=" + std::to_string(cfg.walks);
        break;
    }
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> est(np * ns);
    parallel_for(np * ns, [&](std::size_t task) {
      const std::size_t s = task / np, i = task % np;
      SolverConfig c = cfg;
      c.seed = make_rng(sc.seed, StreamTag::kHarness, s)();  // same streams at every level
      est[task] = detail::sweep_sample(scene, points[i], i, c, axis, pcfg, sc.param);
    });
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double mse = 0.0, bias2 = 0.0, var = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
      double mean = 0.0;
      for (std::size_t s = 0; s < ns; ++s) mean += est[s * np + i];
      mean /= ns;
      double v = 0.0;
      for (std::size_t s = 0; s < ns; ++s) {
        const double e = est[s * np + i];
        v += (e - mean) * (e - mean);
        mse += (e - reference[i]) * (e - reference[i]);
      }
      var += v / ns;
      bias2 += (mean - reference[i]) * (mean - reference[i]);
    }
    out.rmse = std::sqrt(mse / (np * ns));
    out.bias = std::sqrt(bias2 / np);
    out.variance = var / np;
    out.bias_stderr = std::sqrt(out.variance / ns);
    out.bias_corrected = std::sqrt(std::max(0.0, bias2 / np - out.variance / (ns - 1.0)));
    out.walks = static_cast<long>(np * ns) * cfg.walks;
    report.levels.push_back(out);
  }
  return report;
}

inline void write_report_csv(std::ostream& os, const AblationReport& r) {
  os.precision(10);
  os << "axis,level,label,rmse,bias,variance,bias_corrected,bias_stderr,walks,seconds\n";
  for (const auto& l : r.levels)
    os << r.axis << ',' << l.level << ',' << l.label << ',' << l.rmse << ',' << l.bias << ',' << l.variance << ','
       << l.bias_corrected << ',' << l.bias_stderr << ',' << l.walks << ',' << l.seconds << '\n';
}

// Plot-ready long format: one (axis, level, metric, value) row per measurement.
inline void write_report_long(std::ostream& os, const AblationReport& r) {
  os.precision(10);
  os << "axis,level,metric,value\n";
  for (const auto& l : r.levels) {
    os << r.axis << ',' << l.level << ",rmse," << l.rmse << '\n';
    os << r.axis << ',' << l.level << ",bias," << l.bias << '\n';
    os << r.axis << ',' << l.level << ",variance," << l.variance << '\n';
    os << r.axis << ',' << l.level << ",bias_corrected," << l.bias_corrected << '\n';
    os << r.axis << ',' << l.level << ",seconds," << l.seconds << '\n';
  }
}

struct MethodResult {
  std::string method;
  int walks = 0;         // walks per point
  long forward_solves = 0; // walk count including the N extra solves of finite differences
  double seconds = 0.0;
  double rmse = 0.0;
};

struct ComparisonReport {
  double budget = 0.0;
  int params = 0;
  std::vector<MethodResult> methods;
};

/// Differential walks against common-random-number finite differences at matched wall time.
/// Each method is timed on a short calibration run, then given as many walks per point as fit in
/// `budget` seconds. RMSE is over all points and active parameters against `reference[point][k]`.
template <class G>
ComparisonReport equal_time_comparison(const Scene<G>& scene, const std::vector<Vec<G::dim>>& points,
                                       const std::vector<std::vector<double>>& reference, double budget,
                                       SolverConfig cfg, double fd_delta = 1e-3, int calibration_walks = 8) {
  ComparisonReport report;
  report.budget = budget;
  report.params = scene.num_params();
  if (!(budget > 0.0) || points.empty()) return report;
  if (reference.size() != points.size()) throw ConfigError("comparison: reference size mismatch");
  using clock = std::chrono::steady_clock;

  auto run = [&](bool fd, int walks, std::vector<std::vector<double>>& est) {
    SolverConfig c = cfg;
    c.walks = walks;
    est.assign(points.size(), {});
    const auto t0 = clock::now();
    for (std::size_t i = 0; i < points.size(); ++i)
      est[i] = fd ? fd_reference_gradient(points[i], scene, c, fd_delta, i).mean : diff_mean(points[i], scene, c, i).mean;
    return std::chrono::duration<double>(clock::now() - t0).count();
  };
  int active = 0;
  for (int k = 0; k < scene.num_params(); ++k) active += !scene.is_frozen(k);

  for (bool fd : {false, true}) {
    std::vector<std::vector<double>> est;
    const double t_cal = std::max(run(fd, calibration_walks, est), 1e-6);
    const int walks = std::max(1, static_cast<int>(budget / t_cal * calibration_walks));
    MethodResult m;
    m.method = fd ? "finite_difference" : "diff_wos";
    m.walks = walks;
    m.forward_solves = static_cast<long>(walks) * points.size() * (fd ? active + 1 : 1);
    m.seconds = run(fd, walks, est);
    double se = 0.0;
    long count = 0;
    for (std::size_t i = 0; i < points.size(); ++i)
      for (int k = 0; k < scene.num_params(); ++k) {
        if (scene.is_frozen(k)) continue;
        se += (est[i][k] - reference[i][k]) * (est[i][k] - reference[i][k]);
        ++count;
      }
    m.rmse = std::sqrt(se / std::max(1L, count));
    report.methods.push_back(m);
  }
  return report;
}

inline void write_comparison_csv(std::ostream& os, const ComparisonReport& r) {
  os.precision(10);
  os << "method,params,budget,walks,forward_solves,seconds,rmse\n";
  for (const auto& m : r.methods)
    os << m.method << ',' << r.params << ',' << r.budget << ',' << m.walks << ',' << m.forward_solves << ','
       << m.seconds << ',' << m.rmse << '\n';
}

/// Default ablation scene: a smooth blob polyline in the unit box with a rigid translation
/// (parameters 0, 1 = x, y) and boundary data carried along as the harmonic texture
/// f = x^2 - y^2 + x + y. Moving by s e_y gives u(x) = f(x - s e_y), so du/dpi_1 = -df/dy = 2y - 1
/// and du/dpi_0 = -(2x + 1).
inline Scene<Polyline> make_ablation_scene(int vertices = 100) {
  std::vector<Vec2> pts;
  for (int i = 0; i < vertices; ++i) {
    const double th = 2.0 * kPi * i / vertices;
    const double r = 0.35 * (1.0 + 0.15 * std::cos(3.0 * th) + 0.1 * std::sin(2.0 * th));
    pts.push_back(Vec2(0.5, 0.5) + r * Vec2(std::cos(th), std::sin(th)));
  }
  auto geom = Polyline::with_translation(pts, Polyline::single_loop(pts.size()));
  auto f = ScalarField<2>::polynomial({0.0, 1.0, 1.0, 1.0, 0.0, -1.0});
  return Scene<Polyline>(std::move(geom), 0.0, ScalarField<2>::zero(), DataModel<2>::mapped_texture({f}));
}

inline double ablation_reference_dy(const Vec2& x) { return 2.0 * x.y() - 1.0; }
inline double ablation_solution(const Vec2& x) { return x.x() * x.x() - x.y() * x.y() + x.x() + x.y(); }

}  // namespace dwos

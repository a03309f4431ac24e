#pragma once

#include "dwos/functional/functional.hpp"
#include "dwos/geometry/polyline.hpp"
#include "dwos/optim/adam.hpp"
#include "dwos/optim/schedule.hpp"

#include <chrono>
#include <cstring>
#include <cmath>
#include <functional>
#include <ostream>
#include <type_traits>
#include <vector>

namespace dwos {

struct OptimizerConfig {
  AdamConfig adam;
  int iterations = 200;  // T
  int wpp0 = 2;
  int wppT = 64;
  bool vector_adam = true;
  int resample_every = 0;      // polylines only; 0 disables
  double smoothing = 0.0;      // umbrella weight for polyline gradients; 0 disables
  double time_budget = 0.0;    // seconds; 0 means no limit
  std::uint64_t seed = 0;

  void validate() const {
    adam.validate();
    if (iterations < 0) throw ConfigError("optimizer: iterations must be non-negative");
    if (wpp0 < 2 || wppT < wpp0) throw ConfigError("optimizer: need 2 <= WPP_0 <= WPP_T");
    if (resample_every < 0) throw ConfigError("optimizer: resample_every must be non-negative");
    if (smoothing < 0.0 || smoothing > 1.0) throw ConfigError("optimizer: smoothing must lie in [0, 1]");
    if (time_budget < 0.0) throw ConfigError("optimizer: time budget must be non-negative");
  }
};

struct IterationRecord {
  int t = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  int wpp = 0;
  double seconds = 0.0;  // wall time since the start of the run
  std::uint64_t param_hash = 0;
  bool rejected = false;
};

struct OptimizeResult {
  std::vector<double> params;
  std::vector<IterationRecord> log;
  int rejected = 0;
  int skipped = 0;
};

inline std::uint64_t hash_params(std::span<const double> p) {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  for (double v : p) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h = detail::splitmix64(h ^ bits);
  }
  return h;
}

inline void write_log_csv(std::ostream& os, const std::vector<IterationRecord>& log) {
  os << "t,loss,grad_norm,wpp,seconds\n";
  os.precision(17);
  for (const auto& r : log) os << r.t << ',' << r.loss << ',' << r.grad_norm << ',' << r.wpp << ',' << r.seconds << '\n';
}

/// Stochastic gradient descent on J: per iteration t, WPP_t walks per point, a fresh seed derived
/// from (seed, t), regularizers decayed with WPP_t, then an Adam / Vector Adam step. Steps that
/// leave the geometry degenerate are rejected and logged.
template <class G>
OptimizeResult optimize(Scene<G>& scene, const FunctionalSpec<G::dim>& spec, SolverConfig cfg, const ProductConfig& pcfg,
                        const OptimizerConfig& ocfg,
                        const std::function<void(const IterationRecord&)>& on_iteration = {}) {
  ocfg.validate();
  if (ocfg.resample_every > 0 || ocfg.smoothing > 0.0) {
    if constexpr (!std::is_same_v<G, Polyline>) throw ConfigError("optimizer: resampling and smoothing need a polyline");
  }
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  auto make_adam = [&] { return Adam(scene.num_params(), ocfg.vector_adam ? vector_groups(scene.layout()) : std::vector<int>{}); };
  Adam adam = make_adam();
  double spacing = 0.0;
  if constexpr (std::is_same_v<G, Polyline>) spacing = scene.geometry.mean_edge_length();

  OptimizeResult out;
  for (int t = 0; t < ocfg.iterations; ++t) {
    if constexpr (std::is_same_v<G, Polyline>) {
      if (ocfg.resample_every > 0 && t > 0 && t % ocfg.resample_every == 0) {
        scene.geometry = scene.geometry.resampled(spacing);
        scene.frozen.assign(scene.num_params(), 0);
        scene.validate();
        adam = make_adam();
      }
    }
    IterationRecord rec;
    rec.t = t;
    rec.wpp = wpp_schedule(t, ocfg.wpp0, ocfg.wppT, ocfg.iterations);
    cfg.walks = rec.wpp;
    cfg.seed = make_rng(ocfg.seed, StreamTag::kOptimizer, t)();
    const double reg_scale = regularizer_decay(1.0, rec.wpp, ocfg.wpp0);
    FunctionalGradient fg = functional_gradient(scene, spec, cfg, pcfg, reg_scale);
    if constexpr (std::is_same_v<G, Polyline>)
      if (ocfg.smoothing > 0.0) scene.geometry.smooth_gradient(fg.grad, ocfg.smoothing);
    rec.loss = fg.value;
    double norm2 = 0.0;
    for (double g : fg.grad)
      if (std::isfinite(g)) norm2 += g * g;
    rec.grad_norm = std::sqrt(norm2);

    std::vector<double> p = scene.params();
    const std::vector<double> before = p;
    adam.step(p, fg.grad, ocfg.adam);
    for (int k = 0; k < scene.num_params(); ++k)
      if (scene.is_frozen(k)) p[k] = before[k];
    try {
      scene.set_params(p);
    } catch (const NumericalError&) {
      rec.rejected = true;
      ++out.rejected;
    }
    rec.param_hash = hash_params(scene.params());
    rec.seconds = elapsed();
    out.log.push_back(rec);
    if (on_iteration) on_iteration(rec);
    if (ocfg.time_budget > 0.0 && rec.seconds >= ocfg.time_budget) break;
  }
  out.params = scene.params();
  out.skipped = adam.skipped();
  return out;
}

}  // namespace dwos

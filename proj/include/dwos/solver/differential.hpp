#pragma once

#include "dwos/core/parallel.hpp"
#include "dwos/core/sparse.hpp"
#include "dwos/core/stats.hpp"
#include "dwos/solver/forward.hpp"

#include <optional>
#include <vector>

namespace dwos {

/// One coupled walk: the forward sample and the derivative sample share the walk.
struct CoupledEstimate {
  double u = 0.0;
  SparseGrad du;
  int steps = 0;
  bool truncated = false;
  bool failed = false;  // normal-derivative estimate gave up (offset point unusable)
};

inline constexpr std::uint64_t kNestedStream = 0x6e6f726d616cULL;

// v_n at the terminal point, frozen parameters removed.
template <class G>
NormalVelocity active_normal_velocity(const Scene<G>& scene, const BoundaryQuery<G::dim>& q) {
  NormalVelocity vn = scene.geometry.normal_velocity(q);
  std::erase_if(vn, [&](const auto& e) { return scene.is_frozen(e.first); });
  return vn;
}

struct DifferentialValue {
  SparseGrad value;
  bool failed = false;
};

/// Dirichlet data of the differential problem at a boundary point: delta_beta - v_n du/dn.
/// du/dn comes from nested forward walks on a sub-stream of `rng`.
template <class G>
DifferentialValue differential_boundary_value(const BoundaryQuery<G::dim>& q, const Scene<G>& scene,
                                              const SolverConfig& cfg, const CounterRng& rng) {
  const int n = scene.num_params();
  DifferentialValue out{SparseGrad(n), false};
  const NormalVelocity vn = active_normal_velocity(scene, q);
  SparseGrad raw(n);
  scene.data.add_delta_beta(scene.geometry, q, vn, scene.data_offset(), cfg.channel, raw);
  if (!vn.empty()) {
    CounterRng sub = rng.child(kNestedStream);
    const NormalDerivative dn = normal_derivative(q, scene, cfg, sub, cfg.method);
    out.failed = dn.failed;
    if (!dn.failed)
      for (const auto& [k, v] : vn) raw.add(k, -v * dn.value);
  }
  raw.for_each([&](int k, double v) {
    if (!scene.is_frozen(k)) out.value.add(k, v);
  });
  return out;
}

/// Differential walk on spheres: the walk of wos_solve, returning both u and du/dpi.
/// Russian-roulette absorption contributes zero derivative; the differential problem has no source.
template <class G>
CoupledEstimate diff_wos(const Vec<G::dim>& x, const Scene<G>& scene, const SolverConfig& cfg, CounterRng& rng) {
  if (!scene.geometry.contains(x)) throw DomainError("diff_wos: point outside the domain");
  CoupledEstimate est;
  est.du = SparseGrad(scene.num_params());
  WalkEnd<G::dim> end = random_walk(scene, x, cfg, rng);
  est.u = end.source;
  est.steps = end.steps;
  est.truncated = end.status == WalkStatus::Truncated;
  if (end.status != WalkStatus::Hit) return est;
  est.u += end.weight * scene.data.value(scene.geometry, end.query, cfg.channel);
  DifferentialValue dv = differential_boundary_value(end.query, scene, cfg, rng);
  est.failed = dv.failed;
  est.du.add(dv.value, end.weight);
  return est;
}

/// Per-parameter mean and standard error over independent walks.
struct GradientEstimate {
  std::vector<double> mean;
  std::vector<double> stderr_;
  double u = 0.0;
  int walks = 0;
  int truncated = 0;
  int failed = 0;
};

/// cfg.walks coupled walks at x using streams (seed, point, j).
template <class G>
GradientEstimate diff_mean(const Vec<G::dim>& x, const Scene<G>& scene, const SolverConfig& cfg,
                           std::uint64_t point = 0) {
  const int n = scene.num_params();
  std::vector<RunningStats> st(n);
  RunningStats su;
  GradientEstimate out;
  for (int j = 0; j < cfg.walks; ++j) {
    CounterRng rng = walk_rng(cfg.seed, point, j);
    const CoupledEstimate e = diff_wos(x, scene, cfg, rng);
    su.push(e.u);
    for (int k = 0; k < n; ++k) st[k].push(e.du[k]);
    out.truncated += e.truncated;
    out.failed += e.failed;
  }
  out.u = su.mean;
  out.walks = cfg.walks;
  for (int k = 0; k < n; ++k) {
    out.mean.push_back(st[k].mean);
    out.stderr_.push_back(st[k].stderr_mean());
  }
  return out;
}

/// Forward differences (u(pi + delta e_k) - u(pi)) / delta with common random numbers: walk j uses
/// the same stream in all N+1 solves. Parameters whose perturbed geometry is invalid (or that move
/// x out of the domain) are flagged in `failed`.
struct FdEstimate {
  std::vector<double> mean;
  std::vector<double> stderr_;
  std::vector<char> failed;
  int walks = 0;
};

template <class G>
FdEstimate fd_reference_gradient(const Vec<G::dim>& x, const Scene<G>& scene, const SolverConfig& cfg, double delta,
                                 std::uint64_t point = 0, const std::vector<int>& subset = {}) {
  if (!(delta > 0.0)) throw ConfigError("fd: delta must be positive");
  const int n = scene.num_params();
  std::vector<int> params = subset;
  if (params.empty())
    for (int k = 0; k < n; ++k) params.push_back(k);

  std::vector<double> base(cfg.walks);
  for (int j = 0; j < cfg.walks; ++j) {
    CounterRng rng = walk_rng(cfg.seed, point, j);
    base[j] = wos_solve(x, scene, cfg, rng).value;
  }
  FdEstimate out;
  out.mean.assign(n, 0.0);
  out.stderr_.assign(n, 0.0);
  out.failed.assign(n, 0);
  out.walks = cfg.walks;
  const std::vector<double> p0 = scene.params();
  parallel_for(params.size(), [&](std::size_t idx) {
    const int k = params[idx];
    if (scene.is_frozen(k)) return;
    Scene<G> moved = scene;
    std::vector<double> p = p0;
    p[k] += delta;
    try {
      moved.set_params(p);
      if (!moved.geometry.contains(x)) throw DomainError("fd: point left the domain");
      RunningStats st;
      for (int j = 0; j < cfg.walks; ++j) {
        CounterRng rng = walk_rng(cfg.seed, point, j);
        st.push((wos_solve(x, moved, cfg, rng).value - base[j]) / delta);
      }
      out.mean[k] = st.mean;
      out.stderr_[k] = st.stderr_mean();
    } catch (const NumericalError&) {
      out.failed[k] = 1;
    } catch (const DomainError&) {
      out.failed[k] = 1;
    }
  });
  return out;
}

}  // namespace dwos

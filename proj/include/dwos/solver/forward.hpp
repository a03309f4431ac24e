#pragma once

#include "dwos/core/parallel.hpp"
#include "dwos/core/rng.hpp"
#include "dwos/core/stats.hpp"
#include "dwos/kernels/ball_kernel.hpp"
#include "dwos/kernels/sampling.hpp"
#include "dwos/pde/scene.hpp"
#include "dwos/solver/config.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace dwos {

enum class WalkStatus { Hit, Absorbed, Truncated };

template <int Dim>
struct WalkEnd {
  double source = 0.0;  // weighted source contributions along the walk
  double weight = 1.0;  // product of attenuations when Russian roulette is off
  int steps = 0;
  WalkStatus status = WalkStatus::Truncated;
  BoundaryQuery<Dim> query;  // terminal boundary point when status == Hit
};

/// The basic walk on spheres without the boundary lookup: jumps to uniform points on the largest empty
/// sphere, accumulating -G |B| f at a uniform ball point per step, until the epsilon-shell is
/// reached, Russian roulette absorbs the walk, or the step budget runs out.
template <class G>
WalkEnd<G::dim> random_walk(const Scene<G>& scene, Vec<G::dim> x, const SolverConfig& cfg, CounterRng& rng) {
  constexpr int Dim = G::dim;
  const double eps = cfg.epsilon_abs(scene.extent());
  const bool has_source = !scene.source.is_zero();
  WalkEnd<Dim> end;
  for (; end.steps < cfg.max_steps; ++end.steps) {
    WalkStep<Dim> st = scene.geometry.step(x, eps);
    if (st.terminated) {
      end.status = WalkStatus::Hit;
      end.query = std::move(st.query);
      return end;
    }
    const BallKernel<Dim> kernel(st.radius, scene.sigma);
    if (has_source) {
      const Vec<Dim> z = sample_ball<Dim>(rng, x, st.radius);
      const double r = std::min((z - x).norm(), st.radius);
      end.source -= end.weight * kernel.greens(r) * kernel.ball_volume() * scene.source.value(z);
    }
    if (scene.sigma > 0.0) {
      const double alpha = kernel.attenuation();
      if (cfg.russian_roulette) {
        if (rng.uniform() >= alpha) {
          end.status = WalkStatus::Absorbed;
          return end;
        }
      } else {
        end.weight *= alpha;
      }
    }
    x = sample_sphere<Dim>(rng, x, st.radius);
  }
  end.status = WalkStatus::Truncated;
  return end;
}

struct ForwardSample {
  double value = 0.0;
  int steps = 0;
  bool truncated = false;
};

/// One walk-on-spheres estimate of u(x).
template <class G>
ForwardSample wos_solve(const Vec<G::dim>& x, const Scene<G>& scene, const SolverConfig& cfg, CounterRng& rng) {
  if (!scene.geometry.contains(x)) throw DomainError("wos_solve: point outside the domain");
  WalkEnd<G::dim> end = random_walk(scene, x, cfg, rng);
  ForwardSample s{end.source, end.steps, end.status == WalkStatus::Truncated};
  if (end.status == WalkStatus::Hit) s.value += end.weight * scene.data.value(scene.geometry, end.query, cfg.channel);
  return s;
}

struct NormalDerivative {
  double value = 0.0;
  double offset = 0.0;  // offset actually used
  bool failed = false;
};

/// Estimate of du/dn at a boundary point from forward walks started at an interior offset point.
///   backward:    (g(x_bar) - u(x_bar - c n)) / c
///   offset ball: (Dim / c) (n_y . n) u(y),  y uniform on the sphere of radius c about x_bar - c n
/// If the offset point leaves the domain or sits closer than c/2 to another part of the boundary,
/// c is halved (at most three times, never below epsilon); after that the estimate is flagged and 0.
template <class G>
NormalDerivative normal_derivative(const BoundaryQuery<G::dim>& q, const Scene<G>& scene, const SolverConfig& cfg,
                                   CounterRng& rng, NormalMethod method) {
  constexpr int Dim = G::dim;
  const double extent = scene.extent();
  const double eps = cfg.epsilon_abs(extent);
  double c = cfg.offset_abs(extent);
  const int n = cfg.forward_walks;
  std::vector<Vec<Dim>> dirs;
  if (method == NormalMethod::OffsetBall)
    for (int j = 0; j < n; ++j) dirs.push_back(sample_unit_sphere<Dim>(rng));

  for (int attempt = 0;; ++attempt) {
    const Vec<Dim> y0 = q.closest - c * q.normal;
    bool ok = scene.geometry.contains(y0) && scene.geometry.closest(y0).distance >= 0.5 * c;
    if (ok && method == NormalMethod::OffsetBall)
      for (const auto& d : dirs) ok = ok && scene.geometry.contains(Vec<Dim>(y0 + c * d));
    if (ok) {
      NormalDerivative out{0.0, c, false};
      double acc = 0.0;
      for (int j = 0; j < n; ++j) {
        CounterRng sub = rng.child(static_cast<std::uint64_t>(j) + 1);
        if (method == NormalMethod::Backward) {
          acc += wos_solve(y0, scene, cfg, sub).value;
        } else {
          const Vec<Dim> y = y0 + c * dirs[j];
          acc += Dim / c * dirs[j].dot(q.normal) * wos_solve(y, scene, cfg, sub).value;
        }
      }
      acc /= n;
      out.value = method == NormalMethod::Backward ? (scene.data.value(scene.geometry, q, cfg.channel) - acc) / c : acc;
      return out;
    }
    if (attempt == 3 || 0.5 * c < eps) return {0.0, c, true};
    c *= 0.5;
  }
}

struct PointEstimate {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double variance = 0.0;  // unbiased sample variance of single walks
  int walks = 0;
  int truncated = 0;
};

// Stream for walk `walk` at evaluation point `point`.
inline CounterRng walk_rng(std::uint64_t seed, std::uint64_t point, std::uint64_t walk) {
  return make_rng(seed, StreamTag::kWalk, point, walk);
}

/// Mean and variance of cfg.walks forward walks per point. Points outside the domain are skipped
/// (NaN mean, zero walks). Point i uses streams (seed, i, j), so the result is reproducible.
template <class G>
std::vector<PointEstimate> estimate_grid(const std::vector<Vec<G::dim>>& points, const Scene<G>& scene,
                                         const SolverConfig& cfg) {
  cfg.validate();
  std::vector<PointEstimate> out(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    if (!scene.geometry.contains(points[i])) return;
    RunningStats st;
    int truncated = 0;
    for (int j = 0; j < cfg.walks; ++j) {
      CounterRng rng = walk_rng(cfg.seed, i, j);
      const ForwardSample s = wos_solve(points[i], scene, cfg, rng);
      st.push(s.value);
      truncated += s.truncated;
    }
    out[i] = {st.mean, st.variance(), cfg.walks, truncated};
  });
  return out;
}

}  // namespace dwos

#pragma once

#include "dwos/core/errors.hpp"
#include "dwos/core/parallel.hpp"
#include "dwos/core/rng.hpp"
#include "dwos/functional/loss.hpp"
#include "dwos/functional/product.hpp"
#include "dwos/solver/differential.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace dwos {

template <class G>
concept ImplicitBoundary = requires(const G& g, const Vec<G::dim>& x) { g.level_distance(x); };

struct Regularizer {
  std::string kind = "length";
  double strength = 0.0;
};

/// J = int_Omega M L(u - u_ref) dx  [+ int_{dOmega} m l(u - ref_b) dy]  [+ regularizers]
template <int Dim>
struct FunctionalSpec {
  Loss loss;
  Mask<Dim> mask;
  ScalarField<Dim> reference;
  std::optional<Box<Dim>> region;      // sampling box; defaults to the geometry bounds
  int interior_samples = 256;          // rounded to a full stratification grid
  std::optional<double> outside_value; // if set, the loss also covers mask \ Omega with u = this value

  struct BoundaryLoss {
    Loss loss;
    Mask<Dim> mask;
    ScalarField<Dim> reference;
  };
  std::optional<BoundaryLoss> boundary;
  int boundary_samples = 256;

  double band = 1e-2;       // implicit boundaries: band width, fraction of the extent
  int band_samples = 20000; // implicit boundaries: stratified candidates for the band integral

  std::vector<Regularizer> regularizers;
  int regularizer_samples = 256;

  void validate() const {
    loss.validate();
    if (boundary) boundary->loss.validate();
    if (interior_samples < 1 || boundary_samples < 1 || band_samples < 1 || regularizer_samples < 1)
      throw ConfigError("functional: sample counts must be positive");
    if (!(band > 0.0)) throw ConfigError("functional: band must be positive");
    for (const auto& r : regularizers)
      if (r.kind != "length") throw ConfigError("functional: unknown regularizer '" + r.kind + "'");
  }
};

/// Jittered stratified points: m^Dim cells with m = round(count^(1/Dim)), one point per cell.
template <int Dim>
std::vector<Vec<Dim>> stratified_points(const Box<Dim>& box, int count, CounterRng rng) {
  const int m = std::max(1, static_cast<int>(std::lround(std::pow(static_cast<double>(count), 1.0 / Dim))));
  int total = 1;
  for (int d = 0; d < Dim; ++d) total *= m;
  std::vector<Vec<Dim>> pts(total);
  const Vec<Dim> h = box.extent() / m;
  for (int i = 0; i < total; ++i) {
    int rest = i;
    for (int d = 0; d < Dim; ++d) {
      pts[i][d] = box.lo[d] + h[d] * ((rest % m) + rng.uniform());
      rest /= m;
    }
  }
  return pts;
}

template <class G>
Box<G::dim> sampling_region(const Scene<G>& scene, const FunctionalSpec<G::dim>& spec) {
  Box<G::dim> b = spec.region ? *spec.region : scene.geometry.bounds();
  if (b.empty()) throw ConfigError("functional: empty sampling region");
  return b;
}

namespace detail {

// Unbiased estimate of L(E[u] - r) from n walks: the square of the mean uses the pair form.
inline double point_loss(const Loss& loss, std::span<const double> u, double ref) {
  const int n = static_cast<int>(u.size());
  double s = 0.0, s2 = 0.0;
  for (double v : u) {
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  if (loss.kind == LossKind::Squared && n >= 2) {
    const double mean_sq = (s * s - s2) / (static_cast<double>(n) * (n - 1));
    return 0.5 * (mean_sq - 2.0 * ref * mean + ref * ref);
  }
  return loss.value(mean - ref);
}

struct PointResult {
  double value = 0.0;
  std::vector<std::pair<int, double>> grad;
  int walks = 0, truncated = 0, failed = 0;
  bool used = false;
};

}  // namespace detail

struct FunctionalValue {
  double value = 0.0;
  double interior = 0.0;
  double boundary = 0.0;
  double regularizer = 0.0;
  int points = 0;
};

template <class G>
double boundary_measure(const G& g) {
  if constexpr (ImplicitBoundary<G>) throw UnsupportedError("boundary measure unavailable for implicit boundaries");
  else return g.perimeter();
}

/// Monte Carlo estimate of J with cfg.walks forward walks per interior point. Uses the same point
/// and walk streams as functional_gradient, so both see identical forward samples.
template <class G>
FunctionalValue estimate_functional(const Scene<G>& scene, const FunctionalSpec<G::dim>& spec, const SolverConfig& cfg) {
  constexpr int Dim = G::dim;
  spec.validate();
  cfg.validate();
  const Box<Dim> box = sampling_region(scene, spec);
  const auto pts = stratified_points<Dim>(box, spec.interior_samples, make_rng(cfg.seed, StreamTag::kInteriorSample, 0));
  const double w = box.measure() / static_cast<double>(pts.size());
  std::vector<detail::PointResult> res(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    const Vec<Dim>& x = pts[i];
    if (!spec.mask.contains(x)) return;
    const double ref = spec.reference.value(x);
    auto& r = res[i];
    if (!scene.geometry.contains(x)) {
      if (spec.outside_value) {
        r.used = true;
        r.value = w * spec.loss.value(*spec.outside_value - ref);
      }
      return;
    }
    r.used = true;
    std::vector<double> u(cfg.walks);
    for (int j = 0; j < cfg.walks; ++j) {
      CounterRng rng = walk_rng(cfg.seed, i, j);
      u[j] = wos_solve(x, scene, cfg, rng).value;
    }
    r.value = w * detail::point_loss(spec.loss, u, ref);
  });
  FunctionalValue out;
  for (const auto& r : res) {
    out.interior += r.value;
    out.points += r.used;
  }
  if constexpr (!ImplicitBoundary<G>) {
    if (spec.boundary) {
      const double measure = scene.geometry.perimeter();
      for (int b = 0; b < spec.boundary_samples; ++b) {
        CounterRng rng = make_rng(cfg.seed, StreamTag::kBoundarySample, b);
        const auto s = scene.geometry.sample_boundary(rng);
        const auto& q = s.query;
        if (!spec.boundary->mask.contains(q.closest)) continue;
        const double g = scene.data.value(scene.geometry, q, cfg.channel);
        out.boundary += measure / spec.boundary_samples * spec.boundary->loss.value(g - spec.boundary->reference.value(q.closest));
      }
    }
    for (const auto& reg : spec.regularizers) out.regularizer += reg.strength * scene.geometry.perimeter();
  }
  if (out.points == 0 && !spec.boundary) throw ConfigError("functional: mask selects no interior points");
  out.value = out.interior + out.boundary + out.regularizer;
  return out;
}

/// Monte Carlo estimate of alpha * int kappa v_n dy, the derivative of alpha * |dOmega|.
template <class G>
std::vector<double> length_regularizer_gradient(const Scene<G>& scene, double alpha, int samples, std::uint64_t seed) {
  std::vector<double> grad(scene.num_params(), 0.0);
  if (alpha == 0.0) return grad;
  const double measure = scene.geometry.perimeter();
  for (int b = 0; b < samples; ++b) {
    CounterRng rng = make_rng(seed, StreamTag::kRegularizer, b);
    const auto s = scene.geometry.sample_boundary(rng);
    const double k = scene.geometry.curvature(s.query);
    for (const auto& [p, v] : active_normal_velocity(scene, s.query)) grad[p] += alpha * measure / samples * k * v;
  }
  return grad;
}

struct FunctionalGradient {
  double value = 0.0;  // J estimated from the same walks
  std::vector<double> grad;
  int points = 0;
  int walks = 0;
  int truncated = 0;
  int failed = 0;
};

/// Boundary term of dJ/dpi for an implicit boundary, with the boundary integral replaced by a
/// one-sided band inside the domain: int_dOmega F dy ~ (1/eps_b) int_{Omega, |h|/|grad h| < eps_b} F dx.
/// F = M v_n (L(g - u_ref) - L(u_out - u_ref)), evaluated at the projected boundary point.
template <class G>
std::vector<double> implicit_boundary_band_gradient(const Scene<G>& scene, const FunctionalSpec<G::dim>& spec,
                                                    double band, const SolverConfig& cfg) {
  constexpr int Dim = G::dim;
  static_assert(ImplicitBoundary<G>, "band integral needs an implicit boundary");
  const double width = band * scene.extent();
  const Box<Dim> box = sampling_region(scene, spec);
  const auto pts = stratified_points<Dim>(box, spec.band_samples, make_rng(cfg.seed, StreamTag::kBoundarySample, 0));
  const double w = box.measure() / static_cast<double>(pts.size()) / width;
  std::vector<double> grad(scene.num_params(), 0.0);
  int in_band = 0;
  for (const auto& x : pts) {
    if (!scene.geometry.contains(x) || scene.geometry.level_distance(x) >= width) continue;
    ++in_band;
    const BoundaryQuery<Dim> q = scene.geometry.closest(x);
    if (!spec.mask.contains(q.closest)) continue;
    const double ref = spec.reference.value(q.closest);
    double f = spec.loss.value(scene.data.value(scene.geometry, q, cfg.channel) - ref);
    if (spec.outside_value) f -= spec.loss.value(*spec.outside_value - ref);
    if (f == 0.0) continue;
    for (const auto& [k, v] : active_normal_velocity(scene, q)) grad[k] += w * f * v;
  }
  if (in_band == 0) throw ConfigError("functional: band contains no samples; widen band or add band_samples");
  return grad;
}

/// Reverse-mode gradient of J (Reynolds transport):
///   interior:  int_Omega M L'(u - u_ref) du/dpi dx, from cfg.walks coupled walks per point
///   boundary:  int_dOmega M v_n (L(g - u_ref) [- L(u_out - u_ref)]) dy
///   boundary loss: int m (l' (delta_beta - v_n d ref/dn) + kappa v_n l) dy; the l' du/dn terms of
///              l' (du/dpi + v_n du/dn) cancel exactly, so no walks are needed there
///   regularizers scaled by reg_scale
/// Squared loss uses the configured product estimator for u du and the plain mean for u_ref du;
/// other losses use L'(mean of the first half) times the mean of du over the second half.
template <class G>
FunctionalGradient functional_gradient(const Scene<G>& scene, const FunctionalSpec<G::dim>& spec,
                                       const SolverConfig& cfg, const ProductConfig& pcfg, double reg_scale = 1.0) {
  constexpr int Dim = G::dim;
  spec.validate();
  cfg.validate();
  const int n = scene.num_params();
  const Box<Dim> box = sampling_region(scene, spec);
  const auto pts = stratified_points<Dim>(box, spec.interior_samples, make_rng(cfg.seed, StreamTag::kInteriorSample, 0));
  const double w = box.measure() / static_cast<double>(pts.size());
  const double band_width = spec.band * scene.extent();
  const int walks = cfg.walks;
  if (walks < 2) throw ConfigError("functional gradient: needs at least 2 walks per point");
  if constexpr (ImplicitBoundary<G>) {
    if (spec.boundary) throw UnsupportedError("boundary loss is unavailable for implicit boundaries");
    if (!spec.regularizers.empty()) throw UnsupportedError("regularizers are unavailable for implicit boundaries");
  }

  std::vector<detail::PointResult> res(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    const Vec<Dim>& x = pts[i];
    if (!spec.mask.contains(x)) return;
    const double ref = spec.reference.value(x);
    auto& r = res[i];
    if (!scene.geometry.contains(x)) {
      if (spec.outside_value) {
        r.used = true;
        r.value = w * spec.loss.value(*spec.outside_value - ref);
      }
      return;
    }
    r.used = true;
    std::vector<double> u(walks);
    std::vector<SparseGrad> du(walks);
    for (int j = 0; j < walks; ++j) {
      CounterRng rng = walk_rng(cfg.seed, i, j);
      CoupledEstimate e = diff_wos(x, scene, cfg, rng);
      u[j] = e.u;
      du[j] = std::move(e.du);
      r.truncated += e.truncated;
      r.failed += e.failed;
    }
    r.walks = walks;
    r.value = w * detail::point_loss(spec.loss, u, ref);
    if constexpr (ImplicitBoundary<G>) {
      if (scene.geometry.level_distance(x) < band_width) return;  // interior term lives on Omega minus the band
    }
    std::vector<double> c(walks, 0.0);
    if (spec.loss.kind == LossKind::Squared) {
      c = product_weights(u, pcfg);
      for (double& v : c) v -= ref / walks;
    } else {
      const int h = walks / 2;
      double mean = 0.0;
      for (int m = 0; m < h; ++m) mean += u[m];
      const double d = spec.loss.derivative(mean / h - ref);
      for (int m = h; m < walks; ++m) c[m] = d / (walks - h);
    }
    SparseGrad acc(n);
    for (int m = 0; m < walks; ++m)
      if (c[m] != 0.0) acc.add(du[m], w * c[m]);
    acc.for_each([&](int k, double v) { r.grad.push_back({k, v}); });
  });

  FunctionalGradient out;
  out.grad.assign(n, 0.0);
  for (const auto& r : res) {
    out.value += r.value;
    out.points += r.used;
    out.walks += r.walks;
    out.truncated += r.truncated;
    out.failed += r.failed;
    for (const auto& [k, v] : r.grad) out.grad[k] += v;
  }
  if (out.points == 0 && !spec.boundary) throw ConfigError("functional: mask selects no interior points");

  if constexpr (ImplicitBoundary<G>) {
    const auto b = implicit_boundary_band_gradient(scene, spec, spec.band, cfg);
    for (int k = 0; k < n; ++k) out.grad[k] += b[k];
  } else {
    const double measure = scene.geometry.perimeter();
    const double wb = measure / spec.boundary_samples;
    for (int s = 0; s < spec.boundary_samples; ++s) {
      CounterRng rng = make_rng(cfg.seed, StreamTag::kBoundarySample, s);
      const auto sample = scene.geometry.sample_boundary(rng);
      const auto& q = sample.query;
      const NormalVelocity vn = active_normal_velocity(scene, q);
      const double g = scene.data.value(scene.geometry, q, cfg.channel);
      if (spec.mask.contains(q.closest)) {
        const double ref = spec.reference.value(q.closest);
        double f = spec.loss.value(g - ref);
        if (spec.outside_value) f -= spec.loss.value(*spec.outside_value - ref);
        for (const auto& [k, v] : vn) out.grad[k] += wb * f * v;
      }
      if (spec.boundary && spec.boundary->mask.contains(q.closest)) {
        const auto& bl = *spec.boundary;
        const double rb = g - bl.reference.value(q.closest);
        const double lp = bl.loss.derivative(rb);
        const double kl = scene.geometry.curvature(q) * bl.loss.value(rb);
        const double dref = bl.reference.gradient(q.closest).dot(q.normal);
        out.value += wb * bl.loss.value(rb);
        SparseGrad db(n);
        scene.data.add_delta_beta(scene.geometry, q, vn, scene.data_offset(), cfg.channel, db);
        db.for_each([&](int k, double v) {
          if (!scene.is_frozen(k)) out.grad[k] += wb * lp * v;
        });
        for (const auto& [k, v] : vn) out.grad[k] += wb * v * (kl - lp * dref);
      }
    }
    for (const auto& reg : spec.regularizers) {
      const double alpha = reg.strength * reg_scale;
      out.value += alpha * measure;
      const auto rg = length_regularizer_gradient(scene, alpha, spec.regularizer_samples, cfg.seed);
      for (int k = 0; k < n; ++k) out.grad[k] += rg[k];
    }
  }
  return out;
}

}  // namespace dwos

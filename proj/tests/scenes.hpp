#pragma once
// Small analytic scenes shared by the unit tests.

#include "dwos/pde/scene.hpp"
#include "dwos/geometry/polyline.hpp"
#include "dwos/geometry/sphere_set.hpp"

namespace dwos::testing {

inline ScalarField<2> poly2(std::initializer_list<std::pair<const char*, double>> terms) {
  std::array<double, Monomials<2>::count> c{};
  for (auto [name, v] : terms) c[Monomials<2>::index(name)] = v;
  return ScalarField<2>::polynomial(c);
}

inline SphereSet<2> disk(double R = 1.0, Vec2 c = Vec2::Zero()) { return SphereSet<2>({{{c.x(), c.y()}, R, false}}); }

inline SphereSet<2> annulus() { return SphereSet<2>({{{0.0, 0.0}, 2.0, false}, {{0.0, 0.0}, 1.0, true}}); }

// g = 0 on the outer circle, 1 on the hole; u(r) = ln(2 / r) / ln 2.
inline Scene<SphereSet<2>> annulus_scene() {
  Scene<SphereSet<2>> s(annulus(), 0.0, ScalarField<2>::zero(), DataModel<2>::per_primitive({0.0, 1.0}));
  for (int k = 0; k < 5; ++k) s.freeze(k);
  return s;
}

inline Scene<SphereSet<2>> disk_restricted(ScalarField<2> g, double R = 1.0) {
  return Scene<SphereSet<2>>(disk(R), 0.0, ScalarField<2>::zero(), DataModel<2>::restricted({std::move(g)}));
}

inline std::vector<Vec2> circle_points(int n, double r, Vec2 c = Vec2::Zero()) {
  std::vector<Vec2> p;
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * kPi * i / n;
    p.push_back(c + r * Vec2(std::cos(th), std::sin(th)));
  }
  return p;
}

}  // namespace dwos::testing

#include "dwos/functional/functional.hpp"

namespace dwos::testing {

// Grid table of a function over a box, for reference fields.
template <class F>
std::shared_ptr<const GridField> tabulate(F f, Box2 box, int n = 128) {
  auto g = std::make_shared<GridField>(n, n, 1, box);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g->at(i, j) = f(g->cell_center(i, j));
  return g;
}

// u = |x - c|^2 - R^2 inside the disk, 0 outside: the solution for f = 4, g = 0.
inline double bowl(const Vec2& x, const Vec2& c, double R) { return std::min(0.0, (x - c).squaredNorm() - R * R); }

inline Scene<SphereSet<2>> bowl_scene(Vec2 c, double R) {
  return Scene<SphereSet<2>>(disk(R, c), 0.0, ScalarField<2>::constant_value(4.0), DataModel<2>::constant({0.0}));
}

struct Agreement {
  std::vector<RunningStats> grad, fd;
  bool agrees(int k, double sigmas = 3.0) const {
    return std::abs(grad[k].mean - fd[k].mean) <= sigmas * (grad[k].stderr_mean() + fd[k].stderr_mean());
  }
};

// functional_gradient against central differences of estimate_functional, both evaluated with the
// same seed per repetition (common random numbers).
template <class G>
Agreement gradient_vs_fd(const Scene<G>& scene, const FunctionalSpec<G::dim>& spec, SolverConfig cfg,
                         const ProductConfig& pcfg, int seeds, double delta, const std::vector<int>& params) {
  Agreement a;
  a.grad.resize(scene.num_params());
  a.fd.resize(scene.num_params());
  const std::vector<double> p0 = scene.params();
  for (int s = 0; s < seeds; ++s) {
    cfg.seed = 1000 + s;
    const auto fg = functional_gradient(scene, spec, cfg, pcfg);
    for (int k : params) {
      a.grad[k].push(fg.grad[k]);
      Scene<G> plus = scene, minus = scene;
      std::vector<double> p = p0;
      p[k] += delta;
      plus.set_params(p);
      p[k] -= 2.0 * delta;
      minus.set_params(p);
      a.fd[k].push((estimate_functional(plus, spec, cfg).value - estimate_functional(minus, spec, cfg).value) / (2.0 * delta));
    }
  }
  return a;
}

}  // namespace dwos::testing

#pragma once

#include "dwos/core/errors.hpp"
#include "dwos/core/sparse.hpp"
#include "dwos/core/types.hpp"
#include "dwos/pde/grid_field.hpp"

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace dwos {

// Monomials of degree <= 2: 1, x, y, (z,) then the quadratic terms in lexicographic order.
template <int Dim>
struct Monomials {
  static constexpr int count = Dim == 2 ? 6 : 10;

  static constexpr std::array<std::string_view, count> names() {
    if constexpr (Dim == 2) return {"1", "x", "y", "xx", "xy", "yy"};
    else return {"1", "x", "y", "z", "xx", "xy", "xz", "yy", "yz", "zz"};
  }

  static int index(std::string_view name) {
    const auto n = names();
    for (int i = 0; i < count; ++i)
      if (n[i] == name) return i;
    throw ConfigError("unknown monomial '" + std::string(name) + "'");
  }

  static std::array<double, count> eval(const Vec<Dim>& x) {
    std::array<double, count> m{};
    m[0] = 1.0;
    for (int i = 0; i < Dim; ++i) m[1 + i] = x[i];
    int k = 1 + Dim;
    for (int i = 0; i < Dim; ++i)
      for (int j = i; j < Dim; ++j) m[k++] = x[i] * x[j];
    return m;
  }

  static std::array<Vec<Dim>, count> grad(const Vec<Dim>& x) {
    std::array<Vec<Dim>, count> g;
    g.fill(Vec<Dim>::Zero());
    for (int i = 0; i < Dim; ++i) g[1 + i][i] = 1.0;
    int k = 1 + Dim;
    for (int i = 0; i < Dim; ++i)
      for (int j = i; j < Dim; ++j) {
        g[k][i] += x[j];
        g[k][j] += x[i];
        ++k;
      }
    return g;
  }
};

/// Scalar field over space: zero, constant, quadratic polynomial, or bilinear grid table (2D).
/// Polynomial coefficients may be bound to entries of an external parameter vector.
template <int Dim>
struct ScalarField {
  enum class Kind { Zero, Constant, Polynomial, Grid };
  using M = Monomials<Dim>;

  Kind kind = Kind::Zero;
  double constant = 0.0;
  std::array<double, M::count> coeff{};
  std::array<int, M::count> coeff_param = filled(-1);  // parameter index or -1
  std::shared_ptr<const GridField> grid;
  int channel = 0;

  static ScalarField zero() { return {}; }
  static ScalarField constant_value(double v) {
    ScalarField f;
    f.kind = Kind::Constant;
    f.constant = v;
    return f;
  }
  static ScalarField polynomial(std::array<double, M::count> c) {
    ScalarField f;
    f.kind = Kind::Polynomial;
    f.coeff = c;
    return f;
  }
  static ScalarField table(std::shared_ptr<const GridField> g, int channel = 0) {
    if constexpr (Dim != 2) throw ConfigError("grid fields are 2D only");
    if (!g) throw ConfigError("grid field missing");
    if (channel < 0 || channel >= g->channels) throw ConfigError("grid field channel out of range");
    ScalarField f;
    f.kind = Kind::Grid;
    f.grid = std::move(g);
    f.channel = channel;
    return f;
  }

  bool is_zero() const { return kind == Kind::Zero || (kind == Kind::Constant && constant == 0.0); }
  bool has_params() const {
    for (int p : coeff_param)
      if (p >= 0) return true;
    return false;
  }

  // Coefficient k, reading bound coefficients from `params`.
  double coefficient(int k, std::span<const double> params) const {
    return coeff_param[k] >= 0 ? params[coeff_param[k]] : coeff[k];
  }

  double value(const Vec<Dim>& x, std::span<const double> params = {}) const {
    switch (kind) {
      case Kind::Zero: return 0.0;
      case Kind::Constant: return constant;
      case Kind::Polynomial: {
        const auto m = M::eval(x);
        double v = 0.0;
        for (int k = 0; k < M::count; ++k) v += coefficient(k, params) * m[k];
        return v;
      }
      case Kind::Grid:
        if constexpr (Dim == 2) return grid->sample(x, channel);
    }
    return 0.0;
  }

  Vec<Dim> gradient(const Vec<Dim>& x, std::span<const double> params = {}) const {
    if (kind == Kind::Polynomial) {
      const auto g = M::grad(x);
      Vec<Dim> v = Vec<Dim>::Zero();
      for (int k = 0; k < M::count; ++k) v += coefficient(k, params) * g[k];
      return v;
    }
    if constexpr (Dim == 2)
      if (kind == Kind::Grid) return grid->gradient(x, channel);
    return Vec<Dim>::Zero();
  }

  // Adds scale * d(value)/d(params[j]) at offset + j.
  void add_param_derivative(const Vec<Dim>& x, int offset, double scale, SparseGrad& out) const {
    if (kind != Kind::Polynomial || !has_params()) return;
    const auto m = M::eval(x);
    for (int k = 0; k < M::count; ++k)
      if (coeff_param[k] >= 0) out.add(offset + coeff_param[k], scale * m[k]);
  }

 private:
  static constexpr std::array<int, M::count> filled(int v) {
    std::array<int, M::count> a{};
    a.fill(v);
    return a;
  }
};

}  // namespace dwos

#pragma once

#include "dwos/core/errors.hpp"
#include "dwos/core/types.hpp"
#include "dwos/pde/grid_field.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dwos {

enum class LossKind { Squared, L1Smooth, Table };

/// Pointwise loss of the residual r = u - u_ref.
///   squared:   r^2 / 2
///   l1_smooth: sqrt(r^2 + delta^2) - delta
///   table:     piecewise-linear through (r, L) knots, linear extrapolation past the ends
struct Loss {
  LossKind kind = LossKind::Squared;
  double delta = 1e-2;
  std::vector<std::pair<double, double>> table;

  void validate() const {
    if (kind == LossKind::L1Smooth && !(delta > 0.0)) throw ConfigError("loss: delta must be positive");
    if (kind == LossKind::Table) {
      if (table.size() < 2) throw ConfigError("loss: table needs at least two knots");
      for (std::size_t i = 1; i < table.size(); ++i)
        if (!(table[i].first > table[i - 1].first)) throw ConfigError("loss: table knots must increase");
    }
  }

  double value(double r) const {
    switch (kind) {
      case LossKind::Squared: return 0.5 * r * r;
      case LossKind::L1Smooth: return std::sqrt(r * r + delta * delta) - delta;
      case LossKind::Table: {
        const std::size_t i = segment(r);
        const auto& [r0, l0] = table[i];
        return l0 + slope(i) * (r - r0);
      }
    }
    return 0.0;
  }

  double derivative(double r) const {
    switch (kind) {
      case LossKind::Squared: return r;
      case LossKind::L1Smooth: return r / std::sqrt(r * r + delta * delta);
      case LossKind::Table: return slope(segment(r));
    }
    return 0.0;
  }

 private:
  std::size_t segment(double r) const {
    auto it = std::upper_bound(table.begin(), table.end(), r, [](double v, const auto& k) { return v < k.first; });
    std::size_t i = it == table.begin() ? 0 : static_cast<std::size_t>(it - table.begin()) - 1;
    return std::min(i, table.size() - 2);
  }
  double slope(std::size_t i) const {
    return (table[i + 1].second - table[i].second) / (table[i + 1].first - table[i].first);
  }
};

inline LossKind parse_loss_kind(const std::string& s) {
  if (s == "squared") return LossKind::Squared;
  if (s == "l1_smooth") return LossKind::L1Smooth;
  if (s == "table") return LossKind::Table;
  throw ConfigError("unknown loss '" + s + "'");
}
inline const char* to_string(LossKind k) {
  return k == LossKind::Squared ? "squared" : k == LossKind::L1Smooth ? "l1_smooth" : "table";
}

/// Binary mask: optional box and optional grid (cells > 0.5 are inside). Empty means everywhere.
template <int Dim>
struct Mask {
  std::optional<Box<Dim>> box;
  std::shared_ptr<const GridField> grid;

  bool contains(const Vec<Dim>& x) const {
    if (box && !box->contains(x)) return false;
    if constexpr (Dim == 2) {
      if (grid) {
        const double v = grid->sample(x);
        return !std::isnan(v) && v > 0.5;
      }
    }
    return true;
  }
};

}  // namespace dwos

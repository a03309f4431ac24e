#pragma once

#include "dwos/core/errors.hpp"
#include "dwos/core/types.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace dwos {

/// Row-major 2D grid of samples at cell centers: value(i, j, c) = values[(j * nx + i) * channels + c].
/// NaN marks cells without data (e.g. outside the domain).
struct GridField {
  int nx = 0, ny = 0, channels = 1;
  Box2 box;
  std::vector<double> values;

  GridField() = default;
  GridField(int nx_, int ny_, int channels_, Box2 box_)
      : nx(nx_), ny(ny_), channels(channels_), box(box_),
        values(static_cast<std::size_t>(nx_) * ny_ * channels_, 0.0) {
    validate();
  }

  void validate() const {
    if (nx <= 0 || ny <= 0 || channels <= 0) throw ConfigError("grid: dimensions must be positive");
    if (!(box.hi.x() > box.lo.x()) || !(box.hi.y() > box.lo.y())) throw ConfigError("grid: empty bounding box");
    if (values.size() != static_cast<std::size_t>(nx) * ny * channels) throw ConfigError("grid: value count mismatch");
  }

  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  double& at(int i, int j, int c = 0) { return values[(static_cast<std::size_t>(j) * nx + i) * channels + c]; }
  double at(int i, int j, int c = 0) const { return values[(static_cast<std::size_t>(j) * nx + i) * channels + c]; }

  Vec2 cell_size() const { return {(box.hi.x() - box.lo.x()) / nx, (box.hi.y() - box.lo.y()) / ny}; }
  Vec2 cell_center(int i, int j) const {
    const Vec2 h = cell_size();
    return {box.lo.x() + (i + 0.5) * h.x(), box.lo.y() + (j + 0.5) * h.y()};
  }
  std::vector<Vec2> cell_centers() const {
    std::vector<Vec2> pts;
    pts.reserve(size());
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) pts.push_back(cell_center(i, j));
    return pts;
  }

  // Bilinear interpolation between cell centers, clamped at the edges. NaN neighbours are dropped
  // and the remaining weights renormalized; the result is NaN only if all four are NaN.
  double sample(const Vec2& x, int c = 0) const {
    const Vec2 h = cell_size();
    const double fx = std::clamp((x.x() - box.lo.x()) / h.x() - 0.5, 0.0, nx - 1.0);
    const double fy = std::clamp((x.y() - box.lo.y()) / h.y() - 0.5, 0.0, ny - 1.0);
    const int i0 = std::min(static_cast<int>(fx), nx - 1), j0 = std::min(static_cast<int>(fy), ny - 1);
    const int i1 = std::min(i0 + 1, nx - 1), j1 = std::min(j0 + 1, ny - 1);
    const double tx = fx - i0, ty = fy - j0;
    const double w[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
    const double v[4] = {at(i0, j0, c), at(i1, j0, c), at(i0, j1, c), at(i1, j1, c)};
    double sum = 0.0, wsum = 0.0;
    for (int k = 0; k < 4; ++k) {
      if (std::isnan(v[k]) || w[k] == 0.0) continue;
      sum += w[k] * v[k];
      wsum += w[k];
    }
    if (wsum > 0.0) return sum / wsum;
    for (double vk : v)
      if (!std::isnan(vk)) return vk;
    return std::numeric_limits<double>::quiet_NaN();
  }

  // Central difference of the interpolant at half a cell.
  Vec2 gradient(const Vec2& x, int c = 0) const {
    const Vec2 h = 0.5 * cell_size();
    return {(sample(x + Vec2(h.x(), 0), c) - sample(x - Vec2(h.x(), 0), c)) / (2 * h.x()),
            (sample(x + Vec2(0, h.y()), c) - sample(x - Vec2(0, h.y()), c)) / (2 * h.y())};
  }
};

}  // namespace dwos

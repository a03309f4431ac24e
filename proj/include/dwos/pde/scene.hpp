#pragma once

#include "dwos/core/errors.hpp"
#include "dwos/geometry/params.hpp"
#include "dwos/pde/data_model.hpp"
#include "dwos/pde/field.hpp"

#include <span>
#include <string>
#include <vector>

namespace dwos {

/// Screened Poisson problem  Delta u - sigma u = f  in the domain of `geometry`, u = g on its
/// boundary, together with the flat parameter vector [geometry params..., data params...].
template <class G>
struct Scene {
  using Geometry = G;
  static constexpr int dim = G::dim;
  using Point = Vec<dim>;

  G geometry;
  double sigma = 0.0;
  ScalarField<dim> source;
  DataModel<dim> data;
  std::vector<char> frozen;  // per parameter; frozen parameters get no derivative

  Scene() = default;
  Scene(G g, double sigma_, ScalarField<dim> f, DataModel<dim> d)
      : geometry(std::move(g)), sigma(sigma_), source(std::move(f)), data(std::move(d)) {
    validate();
  }

  void validate() {
    if (!(sigma >= 0.0)) throw ConfigError("bvp: sigma must be non-negative");
    data.validate(geometry);
    if (frozen.empty()) frozen.assign(num_params(), 0);
    if (static_cast<int>(frozen.size()) != num_params()) throw ConfigError("scene: frozen mask size mismatch");
  }

  int num_geometry_params() const { return geometry.num_params(); }
  int num_params() const { return geometry.num_params() + data.num_params(); }
  int data_offset() const { return geometry.num_params(); }
  int channels() const { return data.channels(); }

  std::vector<double> params() const {
    std::vector<double> p(geometry.params().begin(), geometry.params().end());
    p.insert(p.end(), data.params().begin(), data.params().end());
    return p;
  }

  void set_params(std::span<const double> p) {
    check_param_count(p, num_params(), "scene");
    const int ng = geometry.num_params();
    geometry.set_params(p.subspan(0, ng));
    data.set_params(p.subspan(ng));
  }

  std::vector<ParamInfo> layout() const {
    std::vector<ParamInfo> l = geometry.layout();
    l.insert(l.end(), data.layout().begin(), data.layout().end());
    return l;
  }

  bool is_frozen(int k) const { return frozen[k] != 0; }
  void freeze(int k, bool f = true) {
    if (k < 0 || k >= num_params()) throw ConfigError("scene: parameter index out of range");
    frozen[k] = f;
  }

  // Length scale that epsilon and offsets are measured in.
  double extent() const { return geometry.bounds().max_side(); }
};

}  // namespace dwos

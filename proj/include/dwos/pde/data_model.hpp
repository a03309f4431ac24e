#pragma once

#include "dwos/core/errors.hpp"
#include "dwos/core/sparse.hpp"
#include "dwos/geometry/params.hpp"
#include "dwos/geometry/query.hpp"
#include "dwos/pde/field.hpp"

#include <string>
#include <vector>

namespace dwos {

enum class DataKind {
  Constant,      // g = value per channel
  PerPrimitive,  // g = value of the boundary component (sphere / loop / curve id); moves with it
  Restricted,    // g = beta(x) restricted to the boundary
  MappedVertex,  // values on data anchors, linear in the local coordinate in between
  MappedTexture, // g = f(reference point): a texture carried along by the boundary
};

template <class G>
concept MappedBoundary = requires(const G& g, const BoundaryQuery<G::dim>& q) {
  g.tangent(q);
  g.point_velocity(q);
  g.reference_point(q);
  g.reference_tangent(q);
  g.data_anchors(0);
  g.num_anchors();
};

/// Dirichlet data and its derivative with respect to the parameters.
///
/// Owns the data parameters (bound polynomial coefficients or anchor values). They sit after the
/// geometry parameters in the scene's parameter vector; `offset` below is that position.
template <int Dim>
class DataModel {
 public:
  DataModel() : DataModel(constant({0.0})) {}

  static DataModel constant(std::vector<double> values) {
    DataModel d(DataKind::Constant, static_cast<int>(values.size()));
    for (double v : values) d.fields_.push_back(ScalarField<Dim>::constant_value(v));
    return d;
  }

  // values[primitive * channels + c]
  static DataModel per_primitive(std::vector<double> values, int channels = 1) {
    DataModel d(DataKind::PerPrimitive, channels);
    if (values.empty() || values.size() % channels) throw ConfigError("data: per-primitive value count mismatch");
    d.primitive_values_ = std::move(values);
    return d;
  }

  // Fields per channel. Coefficients listed in `bound[c]` (monomial indices) become data parameters.
  static DataModel restricted(std::vector<ScalarField<Dim>> fields, const std::vector<std::vector<int>>& bound = {}) {
    return with_fields(DataKind::Restricted, std::move(fields), bound);
  }
  static DataModel mapped_texture(std::vector<ScalarField<Dim>> fields, const std::vector<std::vector<int>>& bound = {}) {
    return with_fields(DataKind::MappedTexture, std::move(fields), bound);
  }

  // values[anchor * channels + c]; every value is a data parameter.
  static DataModel mapped_vertex(std::vector<double> values, int channels = 1) {
    DataModel d(DataKind::MappedVertex, channels);
    if (values.empty() || values.size() % channels) throw ConfigError("data: anchor value count mismatch");
    for (std::size_t i = 0; i < values.size(); ++i)
      d.layout_.push_back({"data.anchor[" + std::to_string(i / channels) + "][" + std::to_string(i % channels) + "]",
                           "data", static_cast<int>(i % channels)});
    d.params_ = std::move(values);
    return d;
  }

  DataKind kind() const { return kind_; }
  int channels() const { return channels_; }
  const std::vector<ScalarField<Dim>>& fields() const { return fields_; }
  const std::vector<double>& primitive_values() const { return primitive_values_; }
  int num_params() const { return static_cast<int>(params_.size()); }
  std::span<const double> params() const { return params_; }
  const std::vector<ParamInfo>& layout() const { return layout_; }
  void set_params(std::span<const double> v) {
    check_param_count(v, params_.size(), "data");
    params_.assign(v.begin(), v.end());
  }

  // Checks the model against a geometry before use.
  template <class G>
  void validate(const G& geom) const {
    if (kind_ == DataKind::MappedVertex || kind_ == DataKind::MappedTexture) {
      if constexpr (!MappedBoundary<G>) {
        throw ConfigError("data: mapped boundary data needs a parametric boundary (polyline or bezier)");
      } else if (kind_ == DataKind::MappedVertex &&
                 static_cast<int>(params_.size()) != geom.num_anchors() * channels_) {
        throw ConfigError("data: expected one value per anchor and channel");
      }
    }
  }

  template <class G>
  double value(const G& geom, const BoundaryQuery<Dim>& q, int c = 0) const {
    switch (kind_) {
      case DataKind::Constant: return fields_[c].constant;
      case DataKind::PerPrimitive: {
        const std::size_t i = static_cast<std::size_t>(q.primitive) * channels_ + c;
        if (i >= primitive_values_.size()) throw ConfigError("data: no value for boundary component");
        return primitive_values_[i];
      }
      case DataKind::Restricted: return fields_[c].value(q.closest, params_);
      case DataKind::MappedVertex:
        if constexpr (MappedBoundary<G>) {
          const auto [a, b] = geom.data_anchors(q.primitive);
          return (1.0 - q.local) * params_[a * channels_ + c] + q.local * params_[b * channels_ + c];
        }
        break;
      case DataKind::MappedTexture:
        if constexpr (MappedBoundary<G>) return fields_[c].value(geom.reference_point(q), params_);
        break;
    }
    throw ConfigError("data: unsupported boundary representation");
  }

  /// Adds the known part of the differential boundary data, i.e. everything except -v_n du/dn.
  ///   restricted:  beta_dot + (d beta/dn) v_n
  ///   mapped:      beta~_dot + (d beta~/dt) t_dot,  t_dot_k = -(tau' . tau_dot_k) / |tau'|^2
  template <class G>
  void add_delta_beta(const G& geom, const BoundaryQuery<Dim>& q, const NormalVelocity& vn, int offset, int c,
                      SparseGrad& out, double scale = 1.0) const {
    switch (kind_) {
      case DataKind::Constant:
      case DataKind::PerPrimitive: return;
      case DataKind::Restricted: {
        fields_[c].add_param_derivative(q.closest, offset, scale, out);
        const double dbeta_dn = fields_[c].gradient(q.closest, params_).dot(q.normal);
        if (dbeta_dn != 0.0)
          for (const auto& [k, v] : vn) out.add(k, scale * dbeta_dn * v);
        return;
      }
      case DataKind::MappedVertex:
      case DataKind::MappedTexture:
        if constexpr (MappedBoundary<G>) {
          double dbeta_dt;
          if (kind_ == DataKind::MappedVertex) {
            const auto [a, b] = geom.data_anchors(q.primitive);
            out.add(offset + a * channels_ + c, scale * (1.0 - q.local));
            out.add(offset + b * channels_ + c, scale * q.local);
            dbeta_dt = params_[b * channels_ + c] - params_[a * channels_ + c];
          } else {
            const Vec<Dim> x0 = geom.reference_point(q);
            fields_[c].add_param_derivative(x0, offset, scale, out);
            dbeta_dt = fields_[c].gradient(x0, params_).dot(geom.reference_tangent(q));
          }
          if (dbeta_dt == 0.0) return;
          const Vec<Dim> tau = geom.tangent(q);
          const double t2 = tau.squaredNorm();
          if (!(t2 > 0.0)) return;
          for (const auto& [k, dir] : geom.point_velocity(q)) out.add(k, -scale * dbeta_dt * tau.dot(dir) / t2);
          return;
        }
        break;
    }
    throw ConfigError("data: unsupported boundary representation");
  }

  // True if the differential data can be nonzero even where v_n vanishes.
  bool has_params() const { return !params_.empty(); }

 private:
  DataModel(DataKind k, int channels) : kind_(k), channels_(channels) {
    if (channels <= 0) throw ConfigError("data: channel count must be positive");
  }

  static DataModel with_fields(DataKind k, std::vector<ScalarField<Dim>> fields, const std::vector<std::vector<int>>& bound) {
    DataModel d(k, static_cast<int>(fields.size()));
    for (std::size_t c = 0; c < bound.size() && c < fields.size(); ++c) {
      for (int m : bound[c]) {
        if (fields[c].kind != ScalarField<Dim>::Kind::Polynomial) throw ConfigError("data: only polynomial coefficients can be parameters");
        if (m < 0 || m >= Monomials<Dim>::count) throw ConfigError("data: monomial index out of range");
        fields[c].coeff_param[m] = static_cast<int>(d.params_.size());
        d.params_.push_back(fields[c].coeff[m]);
        d.layout_.push_back({"data.field[" + std::to_string(c) + "]." + std::string(Monomials<Dim>::names()[m]), "data",
                             static_cast<int>(c)});
      }
    }
    d.fields_ = std::move(fields);
    return d;
  }

  DataKind kind_ = DataKind::Constant;
  int channels_ = 1;
  std::vector<ScalarField<Dim>> fields_;
  std::vector<double> primitive_values_;
  std::vector<double> params_;
  std::vector<ParamInfo> layout_;
};

}  // namespace dwos

#pragma once

#include "dwos/core/errors.hpp"
#include "dwos/functional/functional.hpp"
#include "dwos/geometry/bezier.hpp"
#include "dwos/geometry/monopoles.hpp"
#include "dwos/geometry/polyline.hpp"
#include "dwos/geometry/sphere_set.hpp"
#include "dwos/io/grid_io.hpp"
#include "dwos/optim/optimize.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <memory>
#include <string>
#include <variant>

namespace dwos {

using json = nlohmann::json;

using AnyScene = std::variant<Scene<SphereSet<2>>, Scene<SphereSet<3>>, Scene<Polyline>, Scene<BezierChain>, Scene<Monopoles>>;

/// A validated configuration document with every default filled in. Lengths are in scene units;
/// epsilon, offset and band are fractions of the scene extent (longest bounding-box side).
struct SceneConfig {
  json doc;
  std::filesystem::path base_dir;  // relative grid paths resolve against this
};

namespace cfgdetail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

template <class T>
T require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  return get_or<T>(j, key, T{}, where);
}

inline json point(const json& j, int dim, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) throw ConfigError(where + ": expected " + std::to_string(dim) + " coordinates");
  for (const auto& v : j)
    if (!v.is_number()) throw ConfigError(where + ": coordinates must be numbers");
  return j;
}

inline json box(const json& j, int dim, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(where + ": expected [[lo...], [hi...]]");
  json out = {point(j[0], dim, where), point(j[1], dim, where)};
  for (int c = 0; c < dim; ++c)
    if (!(out[1][c].get<double>() > out[0][c].get<double>())) throw ConfigError(where + ": empty box");
  return out;
}

inline json field(const json& j, int dim, const std::string& where) {
  if (j.is_null() || (j.is_string() && j == "zero")) return {{"kind", "zero"}};
  if (j.is_number()) return {{"kind", "constant"}, {"value", j}};
  if (!j.is_object()) throw ConfigError(where + ": expected a number, \"zero\" or an object");
  if (j.contains("kind")) {  // canonical form
    const std::string kind = require<std::string>(j, "kind", where);
    if (kind == "zero") return {{"kind", "zero"}};
    if (kind == "constant") {
      check_keys(j, {"kind", "value"}, where);
      return {{"kind", "constant"}, {"value", require<double>(j, "value", where)}};
    }
    if (kind == "poly") return field(json{{"poly", j.value("coefficients", json::object())}}, dim, where);
    if (kind == "grid") {
      check_keys(j, {"kind", "path", "channel"}, where);
      return field(json{{"grid", j.at("path")}, {"channel", j.value("channel", 0)}}, dim, where);
    }
    throw ConfigError(where + ": unknown field kind '" + kind + "'");
  }
  check_keys(j, {"constant", "poly", "grid", "channel"}, where);
  if (j.contains("constant")) return {{"kind", "constant"}, {"value", require<double>(j, "constant", where)}};
  if (j.contains("poly")) {
    json coeffs = json::object();
    if (!j["poly"].is_object()) throw ConfigError(where + ".poly: expected an object of monomial coefficients");
    for (const auto& [m, v] : j["poly"].items()) {
      if (dim == 2) Monomials<2>::index(m);
      else Monomials<3>::index(m);
      if (!v.is_number()) throw ConfigError(where + ".poly." + m + ": expected a number");
      coeffs[m] = v;
    }
    return {{"kind", "poly"}, {"coefficients", coeffs}};
  }
  if (j.contains("grid")) {
    if (dim != 2) throw ConfigError(where + ": grid fields are 2D only");
    return {{"kind", "grid"}, {"path", require<std::string>(j, "grid", where)}, {"channel", get_or<int>(j, "channel", 0, where)}};
  }
  throw ConfigError(where + ": empty field");
}

inline json mask(const json& j, int dim, const std::string& where) {
  json out = json::object();
  if (j.is_null()) return out;
  check_keys(j, {"box", "grid"}, where);
  if (j.contains("box")) out["box"] = box(j["box"], dim, where + ".box");
  if (j.contains("grid")) {
    if (dim != 2) throw ConfigError(where + ": grid masks are 2D only");
    out["grid"] = require<std::string>(j, "grid", where);
  }
  return out;
}

inline json loss(const json& j, const std::string& where) {
  json out;
  out["loss"] = get_or<std::string>(j, "loss", "squared", where);
  const LossKind k = parse_loss_kind(out["loss"]);
  out["delta"] = get_or<double>(j, "delta", 1e-2, where);
  if (k == LossKind::Table) {
    out["table"] = require<json>(j, "table", where);
    for (const auto& row : out["table"])
      if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number())
        throw ConfigError(where + ".table: expected [[r, L], ...]");
  }
  return out;
}

inline int geometry_dim(const json& g) {
  const std::string type = g.at("type");
  if (type == "spheres" || type == "monopoles") return g.value("dim", 2);
  return 2;
}

inline json normalize_geometry(const json& j) {
  const std::string w = "geometry";
  const std::string type = require<std::string>(j, "type", w);
  json out = {{"type", type}};
  auto frozen = [&](json& o) {
    o["frozen"] = get_or<std::vector<int>>(j, "frozen", {}, w);
  };
  if (type == "spheres") {
    check_keys(j, {"type", "dim", "spheres", "frozen"}, w);
    const int dim = get_or<int>(j, "dim", 2, w);
    if (dim != 2 && dim != 3) throw ConfigError("geometry.dim must be 2 or 3");
    out["dim"] = dim;
    out["spheres"] = json::array();
    for (const auto& s : require<json>(j, "spheres", w)) {
      check_keys(s, {"center", "radius", "hole"}, "geometry.spheres[]");
      out["spheres"].push_back({{"center", point(require<json>(s, "center", w), dim, "sphere center")},
                                {"radius", require<double>(s, "radius", w)},
                                {"hole", get_or<bool>(s, "hole", false, w)}});
    }
  } else if (type == "polyline") {
    check_keys(j, {"type", "vertices", "loops", "parameterization", "translation", "frozen"}, w);
    out["vertices"] = json::array();
    for (const auto& v : require<json>(j, "vertices", w)) out["vertices"].push_back(point(v, 2, "polyline vertex"));
    json loops = j.contains("loops") ? j["loops"] : json::array();
    if (loops.empty()) {
      json l = json::array();
      for (std::size_t i = 0; i < out["vertices"].size(); ++i) l.push_back(i);
      loops.push_back(l);
    }
    out["loops"] = loops;
    out["parameterization"] = get_or<std::string>(j, "parameterization", "vertices", w);
    if (out["parameterization"] != "vertices" && out["parameterization"] != "translation")
      throw ConfigError("geometry.parameterization must be 'vertices' or 'translation'");
    out["translation"] = point(j.value("translation", json::array({0.0, 0.0})), 2, "geometry.translation");
  } else if (type == "bezier") {
    check_keys(j, {"type", "anchors", "loops", "flatness", "frozen"}, w);
    out["anchors"] = json::array();
    for (const auto& a : require<json>(j, "anchors", w)) {
      check_keys(a, {"position", "out", "in", "colinear"}, "geometry.anchors[]");
      json o = {{"position", point(require<json>(a, "position", w), 2, "anchor position")},
                {"out", point(require<json>(a, "out", w), 2, "anchor out")},
                {"colinear", get_or<bool>(a, "colinear", true, w)}};
      if (a.contains("in")) o["in"] = point(a["in"], 2, "anchor in");
      out["anchors"].push_back(o);
    }
    json loops = j.contains("loops") ? j["loops"] : json::array();
    if (loops.empty()) {
      json l = json::array();
      for (std::size_t i = 0; i < out["anchors"].size(); ++i) l.push_back(i);
      loops.push_back(l);
    }
    out["loops"] = loops;
    out["flatness"] = get_or<double>(j, "flatness", BezierChain::kDefaultFlatness, w);
  } else if (type == "monopoles") {
    check_keys(j, {"type", "dim", "offset", "poles", "bounds", "frozen"}, w);
    const int dim = get_or<int>(j, "dim", 2, w);
    if (dim != 2) throw ConfigError("geometry: configured monopole scenes are 2D");
    out["dim"] = dim;
    out["offset"] = require<double>(j, "offset", w);
    out["poles"] = json::array();
    for (const auto& p : require<json>(j, "poles", w)) {
      check_keys(p, {"scale", "position"}, "geometry.poles[]");
      out["poles"].push_back({{"scale", require<double>(p, "scale", w)}, {"position", point(require<json>(p, "position", w), dim, "pole")}});
    }
    out["bounds"] = box(require<json>(j, "bounds", w), dim, "geometry.bounds");
  } else {
    throw ConfigError("geometry.type must be spheres, polyline, bezier or monopoles");
  }
  frozen(out);
  return out;
}

inline json normalize_bvp(const json& j, int dim) {
  const std::string w = "bvp";
  check_keys(j, {"sigma", "source", "dirichlet"}, w);
  json out;
  out["sigma"] = get_or<double>(j, "sigma", 0.0, w);
  if (!(out["sigma"].get<double>() >= 0.0)) throw ConfigError("bvp.sigma must be non-negative");
  out["source"] = field(j.value("source", json()), dim, "bvp.source");
  const json d = j.value("dirichlet", json{{"model", "constant"}, {"values", {0.0}}});
  check_keys(d, {"model", "values", "channels", "fields", "params"}, "bvp.dirichlet");
  const std::string model = get_or<std::string>(d, "model", "constant", "bvp.dirichlet");
  json o = {{"model", model}};
  if (model == "constant" || model == "per_primitive" || model == "mapped_vertex") {
    o["values"] = get_or<std::vector<double>>(d, "values", {}, "bvp.dirichlet");
    if (o["values"].empty()) throw ConfigError("bvp.dirichlet.values must not be empty");
    o["channels"] = model == "constant" ? static_cast<int>(o["values"].size()) : get_or<int>(d, "channels", 1, "bvp.dirichlet");
  } else if (model == "restricted" || model == "mapped_texture") {
    o["fields"] = json::array();
    for (const auto& f : require<json>(d, "fields", "bvp.dirichlet")) o["fields"].push_back(field(f, dim, "bvp.dirichlet.fields[]"));
    if (o["fields"].empty()) throw ConfigError("bvp.dirichlet.fields must not be empty");
    o["channels"] = o["fields"].size();
    o["params"] = get_or<std::vector<std::vector<std::string>>>(d, "params", {}, "bvp.dirichlet");
  } else {
    throw ConfigError("bvp.dirichlet.model must be constant, per_primitive, restricted, mapped_vertex or mapped_texture");
  }
  out["dirichlet"] = o;
  return out;
}

inline json normalize_functional(const json& j, int dim) {
  const std::string w = "functional";
  check_keys(j, {"loss", "delta", "table", "mask", "reference", "region", "interior_samples", "outside_value", "boundary",
                 "boundary_samples", "band", "band_samples", "regularizers", "regularizer_samples"},
             w);
  json out = loss(j, w);
  out["mask"] = mask(j.value("mask", json()), dim, w + ".mask");
  out["reference"] = field(j.value("reference", json()), dim, w + ".reference");
  if (j.contains("region")) out["region"] = box(j["region"], dim, w + ".region");
  out["interior_samples"] = get_or<int>(j, "interior_samples", 256, w);
  if (j.contains("outside_value") && !j["outside_value"].is_null()) out["outside_value"] = require<double>(j, "outside_value", w);
  if (j.contains("boundary")) {
    const json& b = j["boundary"];
    check_keys(b, {"loss", "delta", "table", "mask", "reference"}, w + ".boundary");
    json bo = loss(b, w + ".boundary");
    bo["mask"] = mask(b.value("mask", json()), dim, w + ".boundary.mask");
    bo["reference"] = field(b.value("reference", json()), dim, w + ".boundary.reference");
    out["boundary"] = bo;
  }
  out["boundary_samples"] = get_or<int>(j, "boundary_samples", 256, w);
  out["band"] = get_or<double>(j, "band", 1e-2, w);
  out["band_samples"] = get_or<int>(j, "band_samples", 20000, w);
  out["regularizers"] = json::array();
  for (const auto& r : j.value("regularizers", json::array())) {
    check_keys(r, {"kind", "strength"}, w + ".regularizers[]");
    out["regularizers"].push_back({{"kind", get_or<std::string>(r, "kind", "length", w)}, {"strength", require<double>(r, "strength", w)}});
  }
  out["regularizer_samples"] = get_or<int>(j, "regularizer_samples", 256, w);
  return out;
}

inline json normalize_solver(const json& j) {
  const std::string w = "solver";
  check_keys(j, {"epsilon", "offset", "max_steps", "russian_roulette", "wpp", "forward_walks", "seed", "estimator",
                 "batch", "method", "channel"},
             w);
  json out;
  out["epsilon"] = get_or<double>(j, "epsilon", 1e-3, w);
  out["offset"] = get_or<double>(j, "offset", 0.0, w);
  out["max_steps"] = get_or<int>(j, "max_steps", 10000, w);
  out["russian_roulette"] = get_or<bool>(j, "russian_roulette", true, w);
  out["wpp"] = get_or<int>(j, "wpp", 64, w);
  out["forward_walks"] = get_or<int>(j, "forward_walks", 1, w);
  out["seed"] = get_or<std::uint64_t>(j, "seed", 0, w);
  out["estimator"] = get_or<std::string>(j, "estimator", "ustat", w);
  parse_product_kind(out["estimator"]);
  out["batch"] = get_or<int>(j, "batch", 8, w);
  out["method"] = get_or<std::string>(j, "method", "backward", w);
  parse_normal_method(out["method"]);
  out["channel"] = get_or<int>(j, "channel", 0, w);
  return out;
}

inline json normalize_optimizer(const json& j) {
  const std::string w = "optimizer";
  check_keys(j, {"lr", "beta1", "beta2", "eps", "iterations", "wpp0", "wppT", "vector_adam", "resample_every",
                 "smoothing", "time_budget", "seed"},
             w);
  json out;
  out["lr"] = get_or<double>(j, "lr", 1e-3, w);
  out["beta1"] = get_or<double>(j, "beta1", 0.9, w);
  out["beta2"] = get_or<double>(j, "beta2", 0.999, w);
  out["eps"] = get_or<double>(j, "eps", 1e-8, w);
  out["iterations"] = get_or<int>(j, "iterations", 200, w);
  out["wpp0"] = get_or<int>(j, "wpp0", 2, w);
  out["wppT"] = get_or<int>(j, "wppT", 64, w);
  out["vector_adam"] = get_or<bool>(j, "vector_adam", true, w);
  out["resample_every"] = get_or<int>(j, "resample_every", 0, w);
  out["smoothing"] = get_or<double>(j, "smoothing", 0.0, w);
  out["time_budget"] = get_or<double>(j, "time_budget", 0.0, w);
  out["seed"] = get_or<std::uint64_t>(j, "seed", 0, w);
  return out;
}

inline json normalize_output(const json& j, int dim) {
  const std::string w = "output";
  check_keys(j, {"grid", "region", "path", "log", "scene"}, w);
  json out;
  out["grid"] = get_or<std::vector<int>>(j, "grid", {32, 32}, w);
  if (out["grid"].size() != 2 || out["grid"][0].get<int>() < 1 || out["grid"][1].get<int>() < 1)
    throw ConfigError("output.grid must be [nx, ny] with positive entries");
  if (j.contains("region")) out["region"] = box(j["region"], dim, "output.region");
  out["path"] = get_or<std::string>(j, "path", "out.grid", w);
  out["log"] = get_or<std::string>(j, "log", "log.csv", w);
  out["scene"] = get_or<std::string>(j, "scene", "final.json", w);
  return out;
}

}  // namespace cfgdetail

/// Validates a raw document and fills defaults; unknown keys are rejected. Idempotent.
inline json normalize_config(const json& raw) {
  using namespace cfgdetail;
  check_keys(raw, {"geometry", "bvp", "functional", "solver", "optimizer", "output"}, "config");
  if (!raw.contains("geometry")) throw ConfigError("config: missing 'geometry'");
  json out;
  out["geometry"] = normalize_geometry(raw["geometry"]);
  const int dim = geometry_dim(out["geometry"]);
  out["bvp"] = normalize_bvp(raw.value("bvp", json::object()), dim);
  out["functional"] = normalize_functional(raw.value("functional", json::object()), dim);
  out["solver"] = normalize_solver(raw.value("solver", json::object()));
  out["optimizer"] = normalize_optimizer(raw.value("optimizer", json::object()));
  out["output"] = normalize_output(raw.value("output", json::object()), dim);
  return out;
}

inline SceneConfig parse_config(const std::string& text, std::filesystem::path base_dir = {}) {
  json raw;
  try {
    raw = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return {normalize_config(raw), std::move(base_dir)};
}

inline SceneConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

inline std::string serialize_config(const SceneConfig& c) { return c.doc.dump(2); }

namespace cfgdetail {

template <int Dim>
Vec<Dim> to_vec(const json& j) {
  Vec<Dim> v;
  for (int c = 0; c < Dim; ++c) v[c] = j[c].get<double>();
  return v;
}

template <int Dim>
Box<Dim> to_box(const json& j) {
  return {to_vec<Dim>(j[0]), to_vec<Dim>(j[1])};
}

inline std::shared_ptr<const GridField> grid_at(const SceneConfig& c, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_relative() && !c.base_dir.empty()) p = c.base_dir / p;
  return std::make_shared<const GridField>(load_grid(p));
}

template <int Dim>
ScalarField<Dim> to_field(const SceneConfig& c, const json& j) {
  const std::string kind = j.at("kind");
  if (kind == "zero") return ScalarField<Dim>::zero();
  if (kind == "constant") return ScalarField<Dim>::constant_value(j.at("value"));
  if (kind == "poly") {
    std::array<double, Monomials<Dim>::count> coeff{};
    for (const auto& [m, v] : j.at("coefficients").items()) coeff[Monomials<Dim>::index(m)] = v.template get<double>();
    return ScalarField<Dim>::polynomial(coeff);
  }
  if constexpr (Dim == 2) return ScalarField<2>::table(grid_at(c, j.at("path")), j.value("channel", 0));
  throw ConfigError("grid fields are 2D only");
}

template <int Dim>
Mask<Dim> to_mask(const SceneConfig& c, const json& j) {
  Mask<Dim> m;
  if (j.contains("box")) m.box = to_box<Dim>(j["box"]);
  if (j.contains("grid")) m.grid = grid_at(c, j["grid"]);
  return m;
}

inline Loss to_loss(const json& j) {
  Loss l;
  l.kind = parse_loss_kind(j.at("loss"));
  l.delta = j.at("delta");
  if (j.contains("table"))
    for (const auto& row : j["table"]) l.table.push_back({row[0].get<double>(), row[1].get<double>()});
  l.validate();
  return l;
}

template <int Dim>
DataModel<Dim> to_data(const SceneConfig& c, const json& d) {
  const std::string model = d.at("model");
  if (model == "constant") return DataModel<Dim>::constant(d.at("values").get<std::vector<double>>());
  if (model == "per_primitive") return DataModel<Dim>::per_primitive(d.at("values").get<std::vector<double>>(), d.at("channels"));
  if (model == "mapped_vertex") return DataModel<Dim>::mapped_vertex(d.at("values").get<std::vector<double>>(), d.at("channels"));
  std::vector<ScalarField<Dim>> fields;
  for (const auto& f : d.at("fields")) fields.push_back(to_field<Dim>(c, f));
  std::vector<std::vector<int>> bound;
  for (const auto& names : d.at("params")) {
    bound.emplace_back();
    for (const auto& n : names) bound.back().push_back(Monomials<Dim>::index(n.get<std::string>()));
  }
  return model == "restricted" ? DataModel<Dim>::restricted(std::move(fields), bound)
                               : DataModel<Dim>::mapped_texture(std::move(fields), bound);
}

template <class G>
Scene<G> assemble(const SceneConfig& c, G geom) {
  constexpr int Dim = G::dim;
  const json& b = c.doc["bvp"];
  Scene<G> s(std::move(geom), b["sigma"].get<double>(), to_field<Dim>(c, b["source"]), to_data<Dim>(c, b["dirichlet"]));
  for (int k : c.doc["geometry"]["frozen"].get<std::vector<int>>()) s.freeze(k);
  return s;
}

inline std::vector<std::vector<int>> to_loops(const json& j) { return j.get<std::vector<std::vector<int>>>(); }

}  // namespace cfgdetail

inline AnyScene build_scene(const SceneConfig& c) {
  using namespace cfgdetail;
  const json& g = c.doc.at("geometry");
  const std::string type = g.at("type");
  if (type == "spheres") {
    std::vector<Sphere> spheres;
    for (const auto& s : g["spheres"]) spheres.push_back({s["center"].get<std::vector<double>>(), s["radius"], s["hole"]});
    if (g["dim"] == 3) return assemble(c, SphereSet<3>(spheres));
    return assemble(c, SphereSet<2>(spheres));
  }
  if (type == "polyline") {
    std::vector<Vec2> pts;
    for (const auto& v : g["vertices"]) pts.push_back(to_vec<2>(v));
    if (g["parameterization"] == "translation")
      return assemble(c, Polyline::with_translation(pts, to_loops(g["loops"]), to_vec<2>(g["translation"])));
    return assemble(c, Polyline::with_vertex_params(pts, to_loops(g["loops"])));
  }
  if (type == "bezier") {
    std::vector<BezierAnchor> anchors;
    for (const auto& a : g["anchors"]) {
      BezierAnchor an{to_vec<2>(a["position"]), to_vec<2>(a["out"]), std::nullopt, a["colinear"]};
      if (a.contains("in")) an.in = to_vec<2>(a["in"]);
      anchors.push_back(an);
    }
    return assemble(c, BezierChain(anchors, to_loops(g["loops"]), g["flatness"]));
  }
  std::vector<Monopole> poles;
  for (const auto& p : g["poles"]) poles.push_back({p["scale"], p["position"].get<std::vector<double>>()});
  return assemble(c, Monopoles(g["offset"], poles, to_box<2>(g["bounds"])));
}

template <int Dim>
FunctionalSpec<Dim> build_functional(const SceneConfig& c) {
  using namespace cfgdetail;
  const json& f = c.doc.at("functional");
  FunctionalSpec<Dim> s;
  s.loss = to_loss(f);
  s.mask = to_mask<Dim>(c, f["mask"]);
  s.reference = to_field<Dim>(c, f["reference"]);
  if (f.contains("region")) s.region = to_box<Dim>(f["region"]);
  s.interior_samples = f["interior_samples"];
  if (f.contains("outside_value")) s.outside_value = f["outside_value"].get<double>();
  if (f.contains("boundary")) {
    const json& b = f["boundary"];
    s.boundary = typename FunctionalSpec<Dim>::BoundaryLoss{to_loss(b), to_mask<Dim>(c, b["mask"]), to_field<Dim>(c, b["reference"])};
  }
  s.boundary_samples = f["boundary_samples"];
  s.band = f["band"];
  s.band_samples = f["band_samples"];
  for (const auto& r : f["regularizers"]) s.regularizers.push_back({r["kind"], r["strength"]});
  s.regularizer_samples = f["regularizer_samples"];
  s.validate();
  return s;
}

inline SolverConfig build_solver(const SceneConfig& c) {
  const json& s = c.doc.at("solver");
  SolverConfig cfg;
  cfg.epsilon = s["epsilon"];
  cfg.offset = s["offset"];
  cfg.max_steps = s["max_steps"];
  cfg.russian_roulette = s["russian_roulette"];
  cfg.walks = s["wpp"];
  cfg.forward_walks = s["forward_walks"];
  cfg.seed = s["seed"];
  cfg.method = parse_normal_method(s["method"]);
  cfg.channel = s["channel"];
  cfg.validate();
  return cfg;
}

inline ProductConfig build_product(const SceneConfig& c) {
  const json& s = c.doc.at("solver");
  return {parse_product_kind(s["estimator"]), s["batch"].get<int>()};
}

inline OptimizerConfig build_optimizer(const SceneConfig& c) {
  const json& o = c.doc.at("optimizer");
  OptimizerConfig cfg;
  cfg.adam = {o["lr"], o["beta1"], o["beta2"], o["eps"]};
  cfg.iterations = o["iterations"];
  cfg.wpp0 = o["wpp0"];
  cfg.wppT = o["wppT"];
  cfg.vector_adam = o["vector_adam"];
  cfg.resample_every = o["resample_every"];
  cfg.smoothing = o["smoothing"];
  cfg.time_budget = o["time_budget"];
  cfg.seed = o["seed"];
  cfg.validate();
  return cfg;
}

// Evaluation grid for outputs: output.region, else the scene bounds.
template <class G>
GridField output_grid(const SceneConfig& c, const Scene<G>& scene, int channels) {
  const json& o = c.doc.at("output");
  Box2 box;
  if (o.contains("region")) box = cfgdetail::to_box<2>(o["region"]);
  else {
    const auto b = scene.geometry.bounds();
    box.lo = b.lo.template head<2>();
    box.hi = b.hi.template head<2>();
  }
  return GridField(o["grid"][0], o["grid"][1], channels, box);
}

/// Canonical document describing the scene's current parameters (for example after optimization).
template <class G>
json export_config(const SceneConfig& c, const Scene<G>& scene) {
  json doc = c.doc;
  json& g = doc["geometry"];
  const auto p = scene.geometry.params();
  std::size_t k = 0;
  if constexpr (std::is_same_v<G, Polyline>) {
    if (g["parameterization"] == "translation") {
      g["translation"] = {p[0], p[1]};
    } else {
      if (g["vertices"].size() != scene.geometry.positions().size()) g["frozen"] = json::array();  // resampled
      g["vertices"] = json::array();
      for (const Vec2& v : scene.geometry.positions()) g["vertices"].push_back({v.x(), v.y()});
      g["loops"] = scene.geometry.loops();
    }
  } else if constexpr (std::is_same_v<G, BezierChain>) {
    for (auto& a : g["anchors"]) {
      const json out0 = a["out"];
      a["position"] = {p[k], p[k + 1]};
      a["out"] = {p[k + 2], p[k + 3]};
      k += 4;
      if (!a["colinear"].get<bool>()) {
        a["in"] = {p[k], p[k + 1]};
        k += 2;
      } else if (a.contains("in")) {
        const double ratio = std::hypot(a["in"][0].get<double>(), a["in"][1].get<double>()) /
                             std::hypot(out0[0].get<double>(), out0[1].get<double>());
        a["in"] = {-ratio * p[k - 2], -ratio * p[k - 1]};
      }
    }
  } else if constexpr (std::is_same_v<G, Monopoles>) {
    g["offset"] = p[k++];
    for (auto& pole : g["poles"]) {
      pole["scale"] = p[k++];
      for (auto& x : pole["position"]) x = p[k++];
    }
  } else {
    for (auto& s : g["spheres"]) {
      for (auto& x : s["center"]) x = p[k++];
      s["radius"] = p[k++];
    }
  }
  json& d = doc["bvp"]["dirichlet"];
  const auto dp = scene.data.params();
  if (d["model"] == "mapped_vertex") {
    if (static_cast<std::size_t>(d["values"].size()) == dp.size()) d["values"] = std::vector<double>(dp.begin(), dp.end());
  } else if (d.contains("params")) {
    std::size_t i = 0;
    for (std::size_t ch = 0; ch < d["params"].size(); ++ch)
      for (const auto& name : d["params"][ch]) d["fields"][ch]["coefficients"][name.get<std::string>()] = dp[i++];
  }
  return normalize_config(doc);
}

}  // namespace dwos

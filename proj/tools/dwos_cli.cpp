// dwos: command-line driver. Subcommands solve | grad | fdcheck | ablate | optimize.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include "dwos/harness/ablation.hpp"
#include "dwos/io/config.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>

using namespace dwos;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> wpp;
  std::string out;
  std::vector<int> grid;
  std::string estimator;
  std::string method;
  std::vector<int> params;
  // fdcheck
  int points = 8;
  double delta = 1e-3;
  // ablate
  std::string axis = "offset";
  std::vector<double> levels;
  int seeds = 16;
  bool builtin = false;
  int ref_wpp = 0;
  std::string long_out;
  // solve
  std::string stderr_out;
  std::string log;
};

SceneConfig load(const Options& o) {
  SceneConfig c = load_config(o.config);
  json& s = c.doc["solver"];
  if (o.seed) s["seed"] = *o.seed;
  if (o.wpp) s["wpp"] = *o.wpp;
  if (!o.estimator.empty()) s["estimator"] = o.estimator;
  if (!o.method.empty()) s["method"] = o.method;
  if (!o.grid.empty()) c.doc["output"]["grid"] = o.grid;
  if (!o.out.empty()) c.doc["output"]["path"] = o.out;
  if (!o.log.empty()) c.doc["output"]["log"] = o.log;
  c.doc = normalize_config(c.doc);
  return c;
}

template <int Dim>
Vec<Dim> lift(const Vec2& p) {
  Vec<Dim> x = Vec<Dim>::Zero();
  x.template head<2>() = p;
  return x;
}

template <int Dim>
std::vector<Vec<Dim>> grid_points(const GridField& g) {
  std::vector<Vec<Dim>> pts;
  for (const Vec2& p : g.cell_centers()) pts.push_back(lift<Dim>(p));
  return pts;
}

template <class G>
std::vector<int> selected_params(const Scene<G>& scene, const std::vector<int>& requested) {
  std::vector<int> sel = requested;
  if (sel.empty())
    for (int k = 0; k < scene.num_params(); ++k) sel.push_back(k);
  for (int k : sel)
    if (k < 0 || k >= scene.num_params()) throw ConfigError("--params: index " + std::to_string(k) + " out of range");
  return sel;
}

template <class G>
int run_solve(const SceneConfig& c, const Scene<G>& scene, const Options& o) {
  constexpr int Dim = G::dim;
  SolverConfig cfg = build_solver(c);
  GridField out = output_grid(c, scene, scene.channels());
  GridField se = out;
  const auto pts = grid_points<Dim>(out);
  long truncated = 0;
  for (int ch = 0; ch < scene.channels(); ++ch) {
    cfg.channel = ch;
    const auto est = estimate_grid(pts, scene, cfg);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const bool in = est[i].walks > 0;
      out.values[i * out.channels + ch] = in ? est[i].mean : std::nan("");
      se.values[i * se.channels + ch] = in ? std::sqrt(est[i].variance / est[i].walks) : std::nan("");
      truncated += est[i].truncated;
    }
  }
  save_grid(c.doc["output"]["path"].get<std::string>(), out);
  if (!o.stderr_out.empty()) save_grid(o.stderr_out, se);
  std::cout << "solve: " << out.nx << "x" << out.ny << " grid, " << cfg.walks << " walks per point, " << truncated
            << " truncated walks -> " << c.doc["output"]["path"].get<std::string>() << "\n";
  return 0;
}

template <class G>
int run_grad(const SceneConfig& c, const Scene<G>& scene, const Options& o) {
  constexpr int Dim = G::dim;
  const SolverConfig cfg = build_solver(c);
  const auto sel = selected_params(scene, o.params);
  GridField out = output_grid(c, scene, static_cast<int>(sel.size()));
  const auto pts = grid_points<Dim>(out);
  std::vector<GradientEstimate> est(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    if (scene.geometry.contains(pts[i])) est[i] = diff_mean(pts[i], scene, cfg, i);
  });
  long failed = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t s = 0; s < sel.size(); ++s) {
      const bool in = est[i].walks > 0;
      out.values[i * sel.size() + s] = in ? est[i].mean[sel[s]] : std::nan("");
      failed += est[i].failed;
    }
  save_grid(c.doc["output"]["path"].get<std::string>(), out);
  std::cout << "grad: " << sel.size() << " parameter channel(s), " << failed << " failed normal-derivative estimates -> "
            << c.doc["output"]["path"].get<std::string>() << "\n";
  return 0;
}

template <class G>
std::vector<Vec<G::dim>> interior_points(const SceneConfig& c, const Scene<G>& scene, int count) {
  const GridField g = output_grid(c, scene, 1);
  std::vector<Vec<G::dim>> inside;
  for (const auto& p : grid_points<G::dim>(g))
    if (scene.geometry.contains(p)) inside.push_back(p);
  if (inside.empty()) throw ConfigError("no grid points inside the domain");
  std::vector<Vec<G::dim>> out;
  const int n = std::min<int>(count, static_cast<int>(inside.size()));
  for (int i = 0; i < n; ++i) out.push_back(inside[(2 * i + 1) * inside.size() / (2 * n)]);
  return out;
}

template <class G>
int run_fdcheck(const SceneConfig& c, const Scene<G>& scene, const Options& o) {
  const SolverConfig cfg = build_solver(c);
  const auto sel = selected_params(scene, o.params);
  const auto pts = interior_points(c, scene, o.points);
  std::ostringstream os;
  os.precision(10);
  os << "point,param,name,diff,diff_stderr,fd,fd_stderr,z,agree\n";
  int agree = 0, total = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto d = diff_mean(pts[i], scene, cfg, i);
    const auto f = fd_reference_gradient(pts[i], scene, cfg, o.delta * scene.extent(), i, sel);
    for (int k : sel) {
      if (f.failed[k]) continue;
      const double s = std::hypot(d.stderr_[k], f.stderr_[k]);
      const double diff = std::abs(d.mean[k] - f.mean[k]);
      const double z = s > 0.0 ? diff / s : (diff == 0.0 ? 0.0 : INFINITY);
      const bool ok = z <= 3.0;
      agree += ok;
      ++total;
      os << i << ',' << k << ',' << scene.layout()[k].name << ',' << d.mean[k] << ',' << d.stderr_[k] << ',' << f.mean[k]
         << ',' << f.stderr_[k] << ',' << z << ',' << ok << '\n';
    }
  }
  if (o.out.empty()) std::cout << os.str();
  else std::ofstream(o.out) << os.str();
  std::cout << "fdcheck: " << agree << "/" << total << " within 3 sigma\n";
  return 0;
}

template <class G>
int run_ablate(const SceneConfig& c, const Scene<G>& scene, const Options& o) {
  const AblationAxis axis = parse_axis(o.axis);
  SweepConfig sc;
  sc.solver = build_solver(c);
  sc.product = build_product(c);
  sc.seeds = o.seeds;
  sc.seed = sc.solver.seed;
  sc.param = o.params.empty() ? 0 : o.params.front();
  std::vector<double> levels = o.levels;
  if (levels.empty()) {
    switch (axis) {
      case AblationAxis::Epsilon: levels = {1e-4, 1e-3, 1e-2, 1e-1}; break;
      case AblationAxis::Offset: levels = {1, 10, 100}; break;
      case AblationAxis::Estimator: levels = {0, 1, 2}; break;
      case AblationAxis::Method: levels = {0, 1}; break;
      case AblationAxis::Wpp: levels = {4, 16, 64}; break;
    }
  }
  AblationReport report;
  if (o.builtin) {
    const Scene<Polyline> ab = make_ablation_scene();
    std::vector<Vec2> pts;
    std::vector<double> ref;
    for (int i = 0; i < o.points; ++i) {
      const double th = 2.0 * kPi * i / o.points;
      pts.push_back(Vec2(0.5, 0.5) + 0.15 * Vec2(std::cos(th), std::sin(th)));
      ref.push_back(ablation_reference_dy(pts.back()));
    }
    sc.param = 1;
    if (axis == AblationAxis::Estimator)  // target u * du/dy
      for (std::size_t i = 0; i < pts.size(); ++i) ref[i] *= ablation_solution(pts[i]);
    report = rmse_sweep(ab, axis, levels, pts, ref, sc);
  } else {
    if (axis == AblationAxis::Estimator) throw UnsupportedError("ablate: the estimator axis needs --builtin");
    const auto pts = interior_points(c, scene, o.points);
    SolverConfig rc = sc.solver;
    rc.walks = o.ref_wpp > 0 ? o.ref_wpp : 16 * rc.walks;
    rc.seed = sc.solver.seed ^ 0x5eed5eedULL;
    std::vector<double> ref;
    for (std::size_t i = 0; i < pts.size(); ++i)
      ref.push_back(fd_reference_gradient(pts[i], scene, rc, o.delta * scene.extent(), i, {sc.param}).mean[sc.param]);
    sc.reference = "finite differences, " + std::to_string(rc.walks) + " walks";
    report = rmse_sweep(scene, axis, levels, pts, ref, sc);
  }
  if (o.out.empty()) write_report_csv(std::cout, report);
  else {
    std::ofstream os(o.out);
    write_report_csv(os, report);
  }
  if (!o.long_out.empty()) {
    std::ofstream os(o.long_out);
    write_report_long(os, report);
  }
  return 0;
}

template <class G>
int run_optimize(const SceneConfig& c, Scene<G> scene, const Options&) {
  const auto spec = build_functional<G::dim>(c);
  const SolverConfig cfg = build_solver(c);
  const OptimizerConfig ocfg = build_optimizer(c);
  const OptimizeResult r = optimize(scene, spec, cfg, build_product(c), ocfg);
  const std::string log = c.doc["output"]["log"], path = c.doc["output"]["scene"];
  {
    std::ofstream os(log);
    if (!os) throw ConfigError("cannot write " + log);
    write_log_csv(os, r.log);
  }
  std::ofstream(path) << export_config(c, scene).dump(2) << '\n';
  const double first = r.log.empty() ? 0.0 : r.log.front().loss, last = r.log.empty() ? 0.0 : r.log.back().loss;
  std::cout << "optimize: " << r.log.size() << " iterations, loss " << first << " -> " << last << ", " << r.rejected
            << " rejected steps -> " << path << ", " << log << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differential walk-on-spheres solver and shape optimizer"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("config", o.config, "scene configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--wpp", o.wpp, "walks per point")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "output path");
    sub->add_option("--grid", o.grid, "grid resolution nx ny")->expected(2);
    sub->add_option("--estimator", o.estimator, "product estimator: uncorrelated | correlated | ustat");
    sub->add_option("--method", o.method, "normal derivative: backward | offset_ball");
    sub->add_option("--params", o.params, "parameter subset")->delimiter(',');
  };
  auto* solve = app.add_subcommand("solve", "forward solution on the output grid");
  common(solve);
  solve->add_option("--stderr", o.stderr_out, "also write per-cell standard errors");
  auto* grad = app.add_subcommand("grad", "derivative fields, one channel per selected parameter");
  common(grad);
  auto* fdcheck = app.add_subcommand("fdcheck", "differential estimates against finite differences");
  common(fdcheck);
  fdcheck->add_option("--points", o.points, "evaluation points");
  fdcheck->add_option("--delta", o.delta, "finite-difference step (fraction of the scene extent)");
  auto* ablate = app.add_subcommand("ablate", "RMSE sweep over one hyperparameter");
  common(ablate);
  ablate->add_option("--axis", o.axis, "epsilon | offset | estimator | method | wpp");
  ablate->add_option("--levels", o.levels, "levels")->delimiter(',');
  ablate->add_option("--seeds", o.seeds, "repetitions per level");
  ablate->add_option("--points", o.points, "evaluation points");
  ablate->add_option("--delta", o.delta, "finite-difference step for the reference");
  ablate->add_option("--ref-wpp", o.ref_wpp, "walks for the finite-difference reference");
  ablate->add_flag("--builtin", o.builtin, "use the built-in blob scene with its analytic reference");
  ablate->add_option("--long", o.long_out, "also write the long-format table");
  auto* opt = app.add_subcommand("optimize", "stochastic gradient descent on the functional");
  common(opt);
  opt->add_option("--log", o.log, "iteration log CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    SceneConfig c = load(o);
    if (opt->parsed() && !o.out.empty()) c.doc["output"]["scene"] = o.out;
    AnyScene scene = build_scene(c);
    return std::visit(
        [&](auto& s) -> int {
          if (solve->parsed()) return run_solve(c, s, o);
          if (grad->parsed()) return run_grad(c, s, o);
          if (fdcheck->parsed()) return run_fdcheck(c, s, o);
          if (ablate->parsed()) return run_ablate(c, s, o);
          return run_optimize(c, s, o);
        },
        scene);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const ConsistencyError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}

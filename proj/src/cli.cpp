#include "hf/cli.hpp"

#include "hf/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>

namespace hf::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Options of one subcommand, settable from flags and from a JSON config.
class Command {
 public:
  Command(CLI::App& parent, const std::string& name, const std::string& help) : app_(parent.add_subcommand(name, help)) {
    app_->add_option("--config", config, "JSON file of option overrides (keys are option names)")->check(CLI::ExistingFile);
  }

  template <typename T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help) {
    setters_[name] = [&var](const json& j) { var = j.get<T>(); };
    return app_->add_option("--" + name, var, help)->capture_default_str();
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
    setters_[name] = [&var](const json& j) { var = j.get<bool>(); };
    return app_->add_flag("--" + name, var, help);
  }

  void apply_config() const {
    if (config.empty()) return;
    const json j = read_json_file(config);
    if (!j.is_object()) throw Error("config must be a JSON object: " + config);
    for (const auto& [key, value] : j.items()) {
      if (key == "command") {
        if (value.get<std::string>() != app_->get_name())
          throw Error("config is for command '" + value.get<std::string>() + "', not '" + app_->get_name() + "'");
        continue;
      }
      auto it = setters_.find(key);
      if (it == setters_.end()) throw Error("unknown config key '" + key + "' for " + app_->get_name());
      try {
        it->second(value);
      } catch (const json::exception&) {
        throw Error("config key '" + key + "' has the wrong type");
      }
    }
  }

  CLI::App* app() const { return app_; }
  std::string config;

 private:
  CLI::App* app_;
  std::map<std::string, std::function<void(const json&)>> setters_;
};

struct Options {
  std::string in, out, csv, mesh_out, curve_out, history, model, out_dir, report;

  // generate
  std::string kind = "helicoid", spacing = "geometric";
  double pitch = 1.0, neck = 1.0, height = 0.0;
  std::vector<double> tilt{0.0, 0.0};
  double r1 = 1.0, r2 = 100.0, turns = 3.0;
  int n_rho = 96, n_theta = 288;
  bool mesh = false;
  double ball = 0.0;
  int n_s = 241, n_t = 481;
  double z_lo = -2.0, z_hi = 2.0;
  int n_z = 41, n_phi = 96;
  double half = 1.0;
  int n_plane = 41;

  // solve
  int max_iters = 50;
  double tol = 1e-10;
  std::string damping = "line-search", initial = "harmonic";
  double bump_amp = 0.0;
  int bump_mode = 1;
  std::string bump_edge = "outer";

  // certify
  double eps = 0.1, N = 2.0, scale = 1.0;
  std::string sheet = "weak";
  double residual_tol = 1e-8;
  double c_decay = 0.0;

  // blowup / decompose
  double C = std::sqrt(2.0);
  double blowup_tol = 1e-6;
  bool intrinsic = false;
  std::vector<double> scan_radii;
  std::vector<double> scan_center{0.0, 0.0, 0.0};
  double eps0 = 0.5, r1_mult = 4.0;

  // asymptotics
  double lr1 = 1.0, C0 = 1.0, rho0 = 0.0, C2 = 0.0, C_osc = 100.0;
  std::vector<double> radii;
  int samples = 512;

  // gauss / levels
  double ray_theta = kInfinity, loop_rho = kInfinity, identity_tol = 1e-4;
  std::vector<double> levels;
  int random = 0;
  long seed = 0;
  int expect = -1;

  // fit / bilip
  int max_points = 2000, fit_iters = 100;
  double search_radius = 0.25, window = 0.0;

  // weierstrass
  double alpha1 = 0.0, alpha2 = 1.0, t0 = -10.0, t1 = 10.0, curve_tol = 1e-9;
  int n_curve = 4096;
};

json envelope(const std::string& command, json parameters, json result) {
  return json{{"schema", kSchemaVersion}, {"command", command}, {"parameters", std::move(parameters)}, {"result", std::move(result)}};
}

void emit(const json& j, const std::string& path, std::ostream& out) {
  if (path.empty()) out << dump(j);
  else write_text_file(path, dump(j));
}

void emit_text(const std::string& text, const std::string& path) {
  if (!path.empty()) write_text_file(path, text);
}

void require_input(const std::string& path) {
  if (path.empty()) throw Error("--in is required");
  if (!fs::exists(path)) throw Error("input not found: " + path);
}

MultiGraph load_graph(const std::string& path) { return graph_from_json(read_json_file(path)); }

MeshPatch load_mesh(const std::string& path) {
  const json j = read_json_file(path);
  if (j.is_object() && j.value("type", "") == "mesh") return mesh_from_json(j);
  return graph_embed(graph_from_json(j));
}

Vec3 vec3(const std::vector<double>& v, const std::string& name) {
  if (v.size() != 3) throw Error("--" + name + " needs three values");
  return Vec3(v[0], v[1], v[2]);
}

// Grid radii in [lo, hi], thinned to at most `count` values.
std::vector<double> default_radii(const PolarGrid& g, double lo, double hi, int count) {
  std::vector<double> all;
  for (int i = 0; i < g.n_rho(); ++i)
    if (g.rho(i) >= lo && g.rho(i) <= hi) all.push_back(g.rho(i));
  if (static_cast<int>(all.size()) <= count) return all;
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(all[static_cast<std::size_t>(std::llround(k * (all.size() - 1.0) / (count - 1.0)))]);
  return out;
}

int cmd_generate(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw Error("--out is required");
  const SurfaceKind kind = surface_kind_from_string(o.kind);
  SurfaceParams p;
  p.pitch = o.pitch;
  p.neck = o.neck;
  if (o.tilt.size() != 2) throw Error("--tilt needs two values");
  p.tilt = Vec2(o.tilt[0], o.tilt[1]);
  p.height = o.height;

  json params{{"kind", o.kind}};
  json written = json::array();
  std::vector<std::string> warnings;
  if (o.mesh || o.ball > 0.0) {
    MeshPatch m;
    if (kind == SurfaceKind::helicoid) {
      if (!(o.ball > 0.0)) throw Error("helicoid mesh needs --ball radius");
      HelicoidModel h;
      h.pitch = o.pitch;
      m = helicoid_ball_mesh(h, o.ball, o.n_s, o.n_t);
      params.update({{"pitch", o.pitch}, {"ball", o.ball}, {"n-s", o.n_s}, {"n-t", o.n_t}});
    } else if (kind == SurfaceKind::catenoid) {
      m = catenoid_mesh(o.neck, o.z_lo, o.z_hi, o.n_z, o.n_phi);
      params.update({{"neck", o.neck}, {"z-lo", o.z_lo}, {"z-hi", o.z_hi}, {"n-z", o.n_z}, {"n-phi", o.n_phi}});
    } else {
      m = plane_mesh(o.half, o.n_plane);
      params.update({{"half", o.half}, {"n-plane", o.n_plane}});
    }
    write_text_file(o.out, dump(mesh_to_json(m)));
    written.push_back(o.out);
  } else {
    const RadialSpacing sp = o.spacing == "uniform" ? RadialSpacing::uniform : RadialSpacing::geometric;
    if (o.spacing != "uniform" && o.spacing != "geometric") throw Error("--spacing must be geometric or uniform");
    const PolarGrid grid(PolarRect{o.r1, o.r2, -kPi * o.turns, kPi * o.turns}, o.n_rho, o.n_theta, sp);
    params.update({{"pitch", o.pitch}, {"neck", o.neck}, {"tilt", o.tilt}, {"height", o.height}, {"r1", o.r1}, {"r2", o.r2},
                   {"turns", o.turns}, {"n-rho", o.n_rho}, {"n-theta", o.n_theta}, {"spacing", o.spacing}});
    const ExactSurface s = make_surface(kind, p, grid);
    warnings = s.warnings;
    if (s.graph) write_text_file(o.out, dump(graph_to_json(*s.graph)));
    else write_text_file(o.out, dump(mesh_to_json(s.mesh)));
    written.push_back(o.out);
    if (!o.mesh_out.empty()) {
      write_text_file(o.mesh_out, dump(mesh_to_json(s.mesh)));
      written.push_back(o.mesh_out);
    }
  }
  out << dump(envelope("generate", params, json{{"written", written}, {"warnings", warnings}}));
  return 0;
}

int cmd_solve(const Options& o, std::ostream& out) {
  require_input(o.in);
  const MultiGraph base = load_graph(o.in);
  SolveConfig cfg;
  cfg.max_newton_iters = o.max_iters;
  cfg.residual_tol = o.tol;
  if (o.damping == "none") cfg.damping = Damping::none;
  else if (o.damping == "line-search") cfg.damping = Damping::line_search;
  else throw Error("--damping must be none or line-search");
  if (o.initial == "zero") cfg.initial_guess = InitialGuess::zero;
  else if (o.initial == "harmonic") cfg.initial_guess = InitialGuess::harmonic_extension;
  else if (o.initial == "given") {
    cfg.initial_guess = InitialGuess::given;
    cfg.given = base;
  } else throw Error("--initial must be zero, harmonic or given");

  json params{{"in", o.in}, {"max-iters", o.max_iters}, {"tol", o.tol}, {"damping", o.damping}, {"initial", o.initial}};
  auto solve = [&]() {
    if (o.bump_amp == 0.0) return solve_dirichlet(base.grid, boundary_of(base), cfg);
    const std::string edge = o.bump_edge;
    if (edge != "outer" && edge != "inner" && edge != "all") throw Error("--bump-edge must be outer, inner or all");
    const double amp = o.bump_amp;
    const int mode = o.bump_mode;
    const double r_out = base.grid.rho(base.grid.n_rho() - 1), r_in = base.grid.rho(0);
    BoundaryBump bump = [=](double rho, double theta) {
      const bool on_outer = std::abs(rho - r_out) <= 1e-12 * r_out;
      const bool on_inner = std::abs(rho - r_in) <= 1e-12 * r_in;
      if (edge == "all" || (edge == "outer" && on_outer) || (edge == "inner" && on_inner)) return amp * std::sin(mode * theta);
      return 0.0;
    };
    return perturb_and_solve(base, bump, cfg);
  };
  if (o.bump_amp != 0.0) params.update({{"bump-amp", o.bump_amp}, {"bump-mode", o.bump_mode}, {"bump-edge", o.bump_edge}});
  const SolveReport r = solve();
  if (!o.out.empty()) {
    MultiGraph sol = r.solution;
    sol.center = base.center;
    sol.frame = base.frame;
    sol.solver_residual = r.residual;
    write_text_file(o.out, dump(graph_to_json(sol)));
  }
  if (!o.mesh_out.empty()) write_text_file(o.mesh_out, dump(mesh_to_json(graph_embed(r.solution))));
  emit_text(solve_history_csv(r), o.history);
  json res = solve_report_to_json(r);
  emit(envelope("solve", params, res), o.report, out);
  return r.converged ? 0 : 1;
}

int cmd_certify(const Options& o, std::ostream& out) {
  require_input(o.in);
  const MultiGraph u = load_graph(o.in);
  CertifyOptions opt;
  opt.residual_tol = o.residual_tol;
  const SheetCertificate c = certify_sheet(u, o.eps, o.N, sheet_kind_from_string(o.sheet), o.scale, opt);
  json res = certificate_to_json(c);
  bool ok = c.verdict;
  if (o.c_decay > 0.0) {
    const DecayReport d = decay_check(u, o.eps, o.c_decay, o.scale);
    res["decay"] = {{"c_decay", o.c_decay}, {"pass", d.pass}, {"worst_ratio", num(d.worst_ratio)}, {"worst_rho", num(d.worst_rho)}, {"samples", d.samples}};
    ok = ok && d.pass;
  }
  if (!o.csv.empty() && c.flatness) emit_text(flatness_csv(*c.flatness), o.csv);
  emit(envelope("certify", {{"in", o.in}, {"eps", o.eps}, {"N", o.N}, {"scale", o.scale}, {"kind", o.sheet}, {"residual-tol", o.residual_tol}, {"c-decay", o.c_decay}}, res),
       o.out, out);
  return ok ? 0 : 1;
}

int cmd_blowup(const Options& o, std::ostream& out) {
  require_input(o.in);
  const MeshPatch m = load_mesh(o.in);
  BlowUpOptions opt;
  opt.tol = o.blowup_tol;
  opt.intrinsic = o.intrinsic;
  opt.scan_radii = o.scan_radii;
  opt.scan_center = vec3(o.scan_center, "scan-center");
  const BlowUpReport r = detect_blowup_pairs(m, o.C, opt);
  emit(envelope("blowup", {{"in", o.in}, {"C", o.C}, {"tol", o.blowup_tol}, {"intrinsic", o.intrinsic}, {"scan-radii", o.scan_radii}, {"scan-center", o.scan_center}},
                blowup_to_json(r)),
       o.out, out);
  return 0;
}

int cmd_laurent(const Options& o, std::ostream& out) {
  require_input(o.in);
  const MultiGraph u = load_graph(o.in);
  LaurentOptions opt;
  opt.C0 = o.C0;
  opt.epsilon = o.eps;
  opt.samples = o.samples;
  opt.rho0 = o.rho0;
  std::vector<double> radii = o.radii;
  if (radii.empty()) radii = default_radii(u.grid, 2.0 * o.lr1, u.grid.rho(u.grid.n_rho() - 1), 16);
  const LaurentFit f = laurent_fit(u, o.lr1, radii, opt);
  bool ok = true;
  for (std::size_t k = 0; k < f.radii.size(); ++k) ok = ok && f.remainder_sup[k] <= f.bound_rhs[k];
  json res = laurent_to_json(f);
  res["bound_holds"] = ok;
  emit_text(laurent_csv(f), o.csv);
  emit(envelope("laurent", {{"in", o.in}, {"r1", o.lr1}, {"radii", radii}, {"C0", o.C0}, {"eps", o.eps}, {"samples", o.samples}, {"rho0", o.rho0}}, res),
       o.out, out);
  return ok ? 0 : 1;
}

int cmd_osc(const Options& o, std::ostream& out) {
  require_input(o.in);
  const MultiGraph u = load_graph(o.in);
  std::vector<double> radii = o.radii;
  if (radii.empty()) radii = default_radii(u.grid, u.grid.rho(0), u.grid.rho(u.grid.n_rho() - 1), 16);
  std::vector<OscReport> rows(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) rows[k] = broken_circle_osc(u, radii[k], o.samples);
  json res = osc_to_json(rows, o.C_osc, o.eps);
  emit_text(osc_csv(rows, o.C_osc, o.eps), o.csv);
  emit(envelope("osc", {{"in", o.in}, {"rho", radii}, {"C", o.C_osc}, {"eps", o.eps}, {"samples", o.samples}}, res), o.out, out);
  return res["all_within"].get<bool>() ? 0 : 1;
}

int cmd_spiral(const Options& o, std::ostream& out) {
  require_input(o.in);
  const MultiGraph u = load_graph(o.in);
  const SpiralReport r = spiral_threshold(u, o.C2, o.eps, o.samples);
  emit_text(spiral_csv(r), o.csv);
  emit(envelope("spiral", {{"in", o.in}, {"C2", o.C2}, {"eps", o.eps}, {"samples", o.samples}}, spiral_to_json(r)), o.out, out);
  return std::isfinite(r.C3) ? 0 : 1;
}

int cmd_gauss(const Options& o, std::ostream& out) {
  require_input(o.in);
  const MultiGraph u = load_graph(o.in);
  const GaussField f = gauss_from_graph(u);
  const double identity = check_gauss_identity(f);
  json res = gauss_to_json(f, identity, gauss_inequality_excess(f));
  res["identity_ok"] = identity <= o.identity_tol;
  const PolarGrid& g = u.grid;
  if (std::isfinite(o.ray_theta)) {
    const int j = std::clamp(static_cast<int>(std::lround(g.angular_position(o.ray_theta))), 0, g.n_theta() - 1);
    std::vector<long> path;
    for (int i = 0; i < g.n_rho(); ++i) path.push_back(g.index(i, j));
    res["ray"] = log_branch_to_json(log_gauss_branch(f, path), g);
  }
  if (std::isfinite(o.loop_rho)) {
    const int i = std::clamp(static_cast<int>(std::lround(g.radial_position(o.loop_rho))), 0, g.n_rho() - 1);
    std::vector<long> path;
    for (int j = 0; j < g.n_theta(); ++j) path.push_back(g.index(i, j));
    const LogBranch b = log_gauss_branch(f, path);
    res["loop"] = {{"rho", num(g.rho(i))}, {"h2_increment", num(b.h2.back() - b.h2.front())}, {"nodes", path.size()}};
  }
  emit_text(gauss_csv(f), o.csv);
  json params{{"in", o.in}, {"tol", o.identity_tol}};
  if (std::isfinite(o.ray_theta)) params["ray-theta"] = o.ray_theta;
  if (std::isfinite(o.loop_rho)) params["loop-rho"] = o.loop_rho;
  emit(envelope("gauss", params, res), o.out, out);
  return identity <= o.identity_tol ? 0 : 1;
}

int cmd_levels(const Options& o, std::ostream& out) {
  require_input(o.in);
  const MeshPatch m = load_mesh(o.in);
  std::vector<double> levels = o.levels;
  if (o.random > 0) {
    double lo = kInfinity, hi = -kInfinity;
    for (const Vec3& x : m.vertices) {
      lo = std::min(lo, x.z());
      hi = std::max(hi, x.z());
    }
    const double pad = 0.05 * (hi - lo);
    std::mt19937_64 rng(static_cast<std::uint64_t>(o.seed));
    std::uniform_real_distribution<double> dist(lo + pad, hi - pad);
    for (int k = 0; k < o.random; ++k) levels.push_back(dist(rng));
  }
  if (levels.empty()) throw Error("no levels: give --levels or --random");
  const auto traces = trace_level_sets(m, levels);
  bool ok = true;
  if (o.expect >= 0)
    for (const auto& t : traces) ok = ok && t.components() == o.expect;
  json res{{"traces", levels_to_json(traces)}};
  if (o.expect >= 0) res["expected_components"] = o.expect, res["all_match"] = ok;
  emit_text(levels_csv(traces), o.csv);
  emit(envelope("levels", {{"in", o.in}, {"levels", o.levels}, {"random", o.random}, {"seed", o.seed}, {"expect", o.expect}}, res), o.out, out);
  return ok ? 0 : 1;
}

int cmd_decompose(const Options& o, std::ostream& out) {
  require_input(o.in);
  const MeshPatch m = load_mesh(o.in);
  BlowUpOptions bo;
  bo.tol = o.blowup_tol;
  const BlowUpReport pairs = detect_blowup_pairs(m, o.C, bo);
  DecomposeOptions opt;
  opt.epsilon0 = o.eps0;
  opt.r1_multiplier = o.r1_mult;
  const DecompositionLabeling d = decompose(m, pairs.pairs, opt);
  json res = labeling_to_json(d);
  res["pairs"] = pairs.pairs.size();
  const bool ok = d.ra_violations.empty() && d.rs_violations.empty();
  res["ok"] = ok;
  emit_text(labeling_csv(d, m), o.csv);
  emit(envelope("decompose", {{"in", o.in}, {"C", o.C}, {"eps0", o.eps0}, {"r1-mult", o.r1_mult}}, res), o.out, out);
  return ok ? 0 : 1;
}

int cmd_fit(const Options& o, std::ostream& out) {
  require_input(o.in);
  const MeshPatch m = load_mesh(o.in);
  FitOptions opt;
  opt.max_points = o.max_points;
  opt.max_iterations = o.fit_iters;
  const HelicoidFit f = fit_helicoid(m, opt);
  emit(envelope("fit", {{"in", o.in}, {"max-points", o.max_points}, {"max-iters", o.fit_iters}}, fit_to_json(f)), o.out, out);
  return 0;
}

int cmd_bilip(const Options& o, std::ostream& out) {
  require_input(o.in);
  const MeshPatch m = load_mesh(o.in);
  json params{{"in", o.in}, {"search-radius", o.search_radius}, {"window", o.window}};
  json res;
  HelicoidModel model;
  if (!o.model.empty()) {
    require_input(o.model);
    const json mj = read_json_file(o.model);
    model = model_from_json(mj.contains("result") ? mj.at("result").at("model") : mj);
    params["model"] = o.model;
  } else {
    FitOptions fo;
    fo.max_points = o.max_points;
    const HelicoidFit f = fit_helicoid(m, fo);
    model = f.model;
    res["fit"] = fit_to_json(f);
  }
  NormalGraphOptions ng;
  ng.search_radius = o.search_radius;
  const DistortionReport r = bilipschitz_estimate(m, model, ng);
  res["distortion"] = distortion_to_json(r);
  bool ok = true;
  if (o.window > 0.0) {
    ok = r.lip_lo >= 1.0 - o.window && r.lip_hi <= 1.0 + o.window;
    res["within_window"] = ok;
  }
  emit_text(distortion_csv(r), o.csv);
  emit(envelope("bilip", params, res), o.out, out);
  return ok ? 0 : 1;
}

int cmd_weierstrass(const Options& o, std::ostream& out) {
  const WeierstrassAlpha a{o.alpha1, o.alpha2};
  const CurveSamples c = weierstrass_curve(a, o.t0, o.t1, o.n_curve);
  const EmbeddednessVerdict v = embeddedness_verdict(c, o.curve_tol);
  if (!o.csv.empty()) {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < c.t.size(); ++k) rows.push_back({c.t[k], c.points[k].x(), c.points[k].y()});
    emit_text(to_csv({"t", "x1", "x2"}, rows), o.csv);
  }
  if (!o.curve_out.empty()) write_text_file(o.curve_out, dump(curve_to_json(c, a)));
  emit(envelope("weierstrass", {{"alpha1", o.alpha1}, {"alpha2", o.alpha2}, {"t0", o.t0}, {"t1", o.t1}, {"n", o.n_curve}, {"tol", o.curve_tol}},
                embeddedness_to_json(v, a, o.t0, o.t1, o.n_curve, o.curve_tol)),
       o.out, out);
  return v.embedded ? 0 : 1;
}

int cmd_report(const Options& o, std::ostream& out) {
  require_input(o.in);
  if (o.out_dir.empty()) throw Error("--out-dir is required");
  const MultiGraph u = load_graph(o.in);
  const fs::path dir(o.out_dir);
  json files = json::array(), skipped = json::array();
  auto put = [&](const std::string& name, const std::string& text) {
    write_text_file(dir / name, text);
    files.push_back(name);
  };

  const auto ray = ray_gradient(u);
  {
    ChartSeries s{"|grad u| at theta = 0", {}, {}};
    std::vector<std::vector<double>> rows;
    for (const auto& [r, g] : ray) {
      s.x.push_back(r);
      s.y.push_back(g);
      rows.push_back({r, g});
    }
    put("gradient.csv", to_csv({"rho", "grad"}, rows));
    put("gradient.svg", svg_line_chart("Gradient along the theta = 0 ray", "rho", "|grad u|", {s}, true, true));
  }

  const std::vector<double> radii = default_radii(u.grid, u.grid.rho(0), u.grid.rho(u.grid.n_rho() - 1), 24);
  try {
    std::vector<OscReport> rows;
    for (double r : radii) rows.push_back(broken_circle_osc(u, r, o.samples));
    put("osc.csv", osc_csv(rows, o.C_osc, o.eps));
    ChartSeries so{"osc", {}, {}}, sb{"C (rho^-1/4 + eps |w|)", {}, {}};
    for (const OscReport& r : rows) {
      so.x.push_back(r.rho);
      so.y.push_back(r.osc);
      sb.x.push_back(r.rho);
      sb.y.push_back(o.C_osc * (r.rho_quarter + o.eps * r.w_abs));
    }
    put("osc.svg", svg_line_chart("Oscillation of u_theta on broken circles", "rho", "osc", {so, sb}, true, false));
  } catch (const Error& e) {
    skipped.push_back({{"item", "osc"}, {"reason", e.what()}});
  }

  try {
    const SpiralReport sp = spiral_threshold(u, o.C2, o.eps, o.samples);
    put("spiral.csv", spiral_csv(sp));
    put("spiral.svg", svg_line_chart("Strict spiraling profile", "rho", "u_theta",
                                     {{"min u_theta", sp.radii, sp.min_u_theta}, {"rhs", sp.radii, sp.rhs}}, true, false));
  } catch (const Error& e) {
    skipped.push_back({{"item", "spiral"}, {"reason", e.what()}});
  }

  try {
    const FlatnessField fl = flatness_terms(u);
    std::vector<std::vector<double>> rows;
    ChartSeries s{"sup over theta", {}, {}};
    for (int i = 0; i < fl.grid.n_rho(); ++i) {
      double m = 0.0;
      for (int j = 0; j < fl.grid.n_theta(); ++j) m = std::max(m, fl.value[fl.grid.index(i, j)]);
      rows.push_back({fl.grid.rho(i), m});
      s.x.push_back(fl.grid.rho(i));
      s.y.push_back(m);
    }
    put("flatness.csv", to_csv({"rho", "flatness_sup"}, rows));
    put("flatness.svg", svg_line_chart("Flatness expression", "rho", "sup", {s}, true, true));
  } catch (const Error& e) {
    skipped.push_back({{"item", "flatness"}, {"reason", e.what()}});
  }

  const json summary = envelope("report", {{"in", o.in}, {"C", o.C_osc}, {"eps", o.eps}, {"C2", o.C2}, {"samples", o.samples}},
                                {{"files", files}, {"skipped", skipped}});
  put("summary.json", dump(summary));
  out << dump(summary);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical toolkit for embedded minimal surfaces", "hf"};
  app.require_subcommand(1);
  Options o;
  std::vector<std::unique_ptr<Command>> cmds;
  std::map<std::string, std::function<int(const Options&, std::ostream&)>> handlers;
  auto make = [&](const std::string& name, const std::string& help, auto fn) -> Command& {
    cmds.push_back(std::make_unique<Command>(app, name, help));
    handlers[name] = fn;
    return *cmds.back();
  };

  {
    Command& c = make("generate", "Closed-form surfaces as graph or mesh containers", cmd_generate);
    c.add("kind", o.kind, "plane, helicoid or catenoid");
    c.add("pitch", o.pitch, "helicoid pitch");
    c.add("neck", o.neck, "catenoid neck radius");
    c.add("tilt", o.tilt, "plane slope (two values)")->expected(2);
    c.add("height", o.height, "plane height");
    c.add("r1", o.r1, "inner radius");
    c.add("r2", o.r2, "outer radius");
    c.add("turns", o.turns, "angular half-span in units of pi");
    c.add("n-rho", o.n_rho, "radial nodes");
    c.add("n-theta", o.n_theta, "angular nodes");
    c.add("spacing", o.spacing, "geometric or uniform");
    c.flag("mesh", o.mesh, "write a mesh instead of a graph");
    c.add("ball", o.ball, "helicoid ball mesh radius");
    c.add("n-s", o.n_s, "helicoid mesh ruling samples");
    c.add("n-t", o.n_t, "helicoid mesh angle samples");
    c.add("z-lo", o.z_lo, "catenoid mesh bottom");
    c.add("z-hi", o.z_hi, "catenoid mesh top");
    c.add("n-z", o.n_z, "catenoid mesh height samples");
    c.add("n-phi", o.n_phi, "catenoid mesh angle samples");
    c.add("half", o.half, "plane mesh half width");
    c.add("n-plane", o.n_plane, "plane mesh samples per side");
    c.add("out", o.out, "output container");
    c.add("mesh-out", o.mesh_out, "also write the embedded mesh");
  }
  {
    Command& c = make("solve", "Dirichlet problem for the minimal surface equation", cmd_solve);
    c.add("in", o.in, "graph supplying boundary values");
    c.add("max-iters", o.max_iters, "Newton iterations");
    c.add("tol", o.tol, "residual tolerance");
    c.add("damping", o.damping, "none or line-search");
    c.add("initial", o.initial, "zero, harmonic or given");
    c.add("bump-amp", o.bump_amp, "boundary bump amplitude");
    c.add("bump-mode", o.bump_mode, "bump angular frequency");
    c.add("bump-edge", o.bump_edge, "outer, inner or all");
    c.add("out", o.out, "solution graph");
    c.add("mesh-out", o.mesh_out, "solution mesh");
    c.add("history", o.history, "residual history CSV");
    c.add("report", o.report, "solve report JSON (stdout when absent)");
  }
  {
    Command& c = make("certify", "Weak or strong sheet certificate", cmd_certify);
    c.add("in", o.in, "graph");
    c.add("eps", o.eps, "epsilon");
    c.add("N", o.N, "half-turn count");
    c.add("scale", o.scale, "scale s");
    c.add("kind", o.sheet, "weak or strong");
    c.add("residual-tol", o.residual_tol, "equation residual bound");
    c.add("c-decay", o.c_decay, "also check gradient decay with this constant");
    c.add("out", o.out, "certificate JSON");
    c.add("csv", o.csv, "flatness field CSV");
  }
  {
    Command& c = make("blowup", "Blow-up pair detection", cmd_blowup);
    c.add("in", o.in, "mesh or graph");
    c.add("C", o.C, "blow-up constant");
    c.add("tol", o.blowup_tol, "relative slack on the curvature bound");
    c.flag("intrinsic", o.intrinsic, "geodesic balls");
    c.add("scan-radii", o.scan_radii, "restrict centers to these radii");
    c.add("scan-center", o.scan_center, "center of the scan")->expected(3);
    c.add("out", o.out, "pairs JSON");
  }
  {
    Command& c = make("laurent", "Laurent coefficient of u_x - i u_y", cmd_laurent);
    c.add("in", o.in, "graph");
    c.add("r1", o.lr1, "inner radius r1");
    c.add("radii", o.radii, "tabulated radii");
    c.add("C0", o.C0, "remainder constant");
    c.add("eps", o.eps, "epsilon");
    c.add("samples", o.samples, "broken circle samples");
    c.add("rho0", o.rho0, "extraction radius (0: 2 r1)");
    c.add("out", o.out, "fit JSON");
    c.add("csv", o.csv, "remainder table CSV");
  }
  {
    Command& c = make("osc", "Oscillation of u_theta on broken circles", cmd_osc);
    c.add("in", o.in, "graph");
    c.add("rho", o.radii, "radii");
    c.add("C", o.C_osc, "bound constant");
    c.add("eps", o.eps, "epsilon");
    c.add("samples", o.samples, "broken circle samples");
    c.add("out", o.out, "JSON");
    c.add("csv", o.csv, "table CSV");
  }
  {
    Command& c = make("spiral", "Strict spiraling threshold", cmd_spiral);
    c.add("in", o.in, "graph");
    c.add("C2", o.C2, "lower bound on w at the inner radius");
    c.add("eps", o.eps, "epsilon");
    c.add("samples", o.samples, "broken circle samples");
    c.add("out", o.out, "JSON");
    c.add("csv", o.csv, "profile CSV");
  }
  {
    Command& c = make("gauss", "Gauss map of a graph", cmd_gauss);
    c.add("in", o.in, "graph");
    c.add("ray-theta", o.ray_theta, "log branch along this angular column");
    c.add("loop-rho", o.loop_rho, "log branch around this radial row");
    c.add("tol", o.identity_tol, "identity tolerance");
    c.add("out", o.out, "JSON");
    c.add("csv", o.csv, "per-node CSV");
  }
  {
    Command& c = make("levels", "Level sets of x3", cmd_levels);
    c.add("in", o.in, "mesh or graph");
    c.add("levels", o.levels, "levels");
    c.add("random", o.random, "number of random levels");
    c.add("seed", o.seed, "random seed");
    c.add("expect", o.expect, "expected component count");
    c.add("out", o.out, "JSON");
    c.add("csv", o.csv, "polyline CSV");
  }
  {
    Command& c = make("decompose", "R_A / R_S labeling", cmd_decompose);
    c.add("in", o.in, "mesh or graph");
    c.add("C", o.C, "blow-up constant");
    c.add("eps0", o.eps0, "gradient threshold");
    c.add("r1-mult", o.r1_mult, "ball multiplier");
    c.add("out", o.out, "JSON");
    c.add("csv", o.csv, "per-vertex labels CSV");
  }
  {
    Command& c = make("fit", "Best-fit helicoid", cmd_fit);
    c.add("in", o.in, "mesh or graph");
    c.add("max-points", o.max_points, "subsample size");
    c.add("max-iters", o.fit_iters, "iterations per restart");
    c.add("out", o.out, "JSON");
  }
  {
    Command& c = make("bilip", "Bi-Lipschitz comparison with a helicoid", cmd_bilip);
    c.add("in", o.in, "mesh or graph");
    c.add("model", o.model, "helicoid model JSON (fit output); fitted when absent");
    c.add("search-radius", o.search_radius, "normal ray half length");
    c.add("max-points", o.max_points, "fit subsample size");
    c.add("window", o.window, "exit 1 unless the interval lies in [1 - w, 1 + w]");
    c.add("out", o.out, "JSON");
    c.add("csv", o.csv, "per-vertex singular values CSV");
  }
  {
    Command& c = make("weierstrass", "Axis curve of g = exp(alpha z) and its embeddedness", cmd_weierstrass);
    c.add("alpha1", o.alpha1, "real part of alpha");
    c.add("alpha2", o.alpha2, "imaginary part of alpha");
    c.add("t0", o.t0, "window start");
    c.add("t1", o.t1, "window end");
    c.add("n", o.n_curve, "samples");
    c.add("tol", o.curve_tol, "segment tolerance");
    c.add("out", o.out, "JSON");
    c.add("csv", o.csv, "curve CSV");
    c.add("curve-out", o.curve_out, "curve container");
  }
  {
    Command& c = make("report", "CSV tables and SVG charts of radial profiles", cmd_report);
    c.add("in", o.in, "graph");
    c.add("out-dir", o.out_dir, "output directory");
    c.add("C", o.C_osc, "oscillation constant");
    c.add("C2", o.C2, "spiraling constant");
    c.add("eps", o.eps, "epsilon");
    c.add("samples", o.samples, "broken circle samples");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    out << sub->help();
    return 0;
  } catch (const CLI::ParseError& e) {
    CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << "error: " << e.what() << "\n" << sub->help();
    return 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    for (const auto& c : cmds)
      if (c->app() == sub) c->apply_config();
    return handlers.at(sub->get_name())(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what();
    if (!e.indices().empty()) {
      err << " [";
      const std::size_t show = std::min<std::size_t>(e.indices().size(), 20);
      for (std::size_t k = 0; k < show; ++k) err << (k ? " " : "") << e.indices()[k];
      if (show < e.indices().size()) err << " ...";
      err << "]";
    }
    err << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace hf::cli

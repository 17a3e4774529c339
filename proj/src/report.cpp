#include "hf/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace hf {

using nlohmann::json;

json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

json num_list(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

json complex_to_json(Complex z) { return json{{"re", num(z.real())}, {"im", num(z.imag())}}; }

json solve_report_to_json(const SolveReport& r) {
  return json{{"iterations", r.iterations},
              {"residual", num(r.residual)},
              {"converged", r.converged},
              {"max_principle_ok", r.max_principle_ok},
              {"message", r.message},
              {"warnings", r.warnings},
              {"history", num_list(r.history)}};
}

std::string solve_history_csv(const SolveReport& r) {
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < r.history.size(); ++k) rows.push_back({static_cast<double>(k), r.history[k]});
  return to_csv({"iteration", "residual"}, rows);
}

json certificate_to_json(const SheetCertificate& c) {
  json j{{"kind", to_string(c.kind)},
         {"epsilon", num(c.epsilon)},
         {"N", num(c.N)},
         {"scale", num(c.scale)},
         {"center", vec_to_json(c.center)},
         {"r_max", num(c.r_max)},
         {"nodes_checked", c.nodes_checked},
         {"residual", {{"source", c.residual_source}, {"sup", num(c.residual_sup)}, {"bound", num(c.residual_bound)}, {"ok", c.residual_ok}}},
         {"gradient", {{"sup", num(c.gradient_sup)}, {"bound", num(c.epsilon)}, {"ok", c.gradient_ok}}},
         {"cone", {{"sup", num(c.cone_sup)}, {"bound", num(c.epsilon)}, {"ok", c.cone_ok}}},
         {"embedded", c.embedded},
         {"separation_sign", c.separation_sign},
         {"tilt", num(c.tilt)},
         {"verdict", c.verdict},
         {"margin", num(c.margin)},
         {"failures", c.failures}};
  if (c.kind == SheetKind::strong) {
    j["flatness"] = {{"sup", c.flatness_sup ? num(*c.flatness_sup) : json(nullptr)}, {"bound", num(c.epsilon)}, {"ok", c.flatness_ok}};
    j["normalization"] = {{"gradient_at_rmax", num(c.gradient_at_rmax)},
                          {"fit", {{"valid", c.decay.valid}, {"L", num(c.decay.L)}, {"B", num(c.decay.B)}, {"p", num(c.decay.p)}, {"rms", num(c.decay.rms)}, {"samples", c.decay.samples}}},
                          {"ok", c.normalization_ok}};
  }
  return j;
}

std::string flatness_csv(const FlatnessField& f) {
  std::vector<std::vector<double>> rows;
  for (long k = 0; k < f.grid.size(); ++k)
    rows.push_back({f.grid.rho(f.grid.radial_index(k)), f.grid.theta(f.grid.angular_index(k)), f.value[k], f.grad_term[k],
                    f.hess_term[k], f.wgrad_term[k], f.whess_term[k]});
  return to_csv({"rho", "theta", "value", "grad", "hess", "wgrad", "whess"}, rows);
}

json blowup_to_json(const BlowUpReport& r) {
  json pairs = json::array();
  for (const BlowUpPair& p : r.pairs)
    pairs.push_back({{"y", vec_to_json(p.y)}, {"s", num(p.s)}, {"C", num(p.C)}, {"vertex", p.vertex}, {"A2", num(p.A2)}, {"scan_radius", num(p.scan_radius)}});
  return json{{"pairs", pairs},
              {"count", r.pairs.size()},
              {"candidates", r.candidates},
              {"discarded_boundary", r.discarded_boundary},
              {"discarded_duplicate", r.discarded_duplicate}};
}

json laurent_to_json(const LaurentFit& f) {
  return json{{"r1", num(f.r1)},
              {"rho0", num(f.rho0)},
              {"c", complex_to_json(f.c)},
              {"closure_defect", num(f.closure_defect)},
              {"radii", num_list(f.radii)},
              {"remainder_sup", num_list(f.remainder_sup)},
              {"bound_rhs", num_list(f.bound_rhs)},
              {"w_r1", num(f.w_r1)},
              {"C0", num(f.C0)},
              {"epsilon", num(f.epsilon)},
              {"fitted_C0", num(f.fitted_C0)}};
}

std::string laurent_csv(const LaurentFit& f) {
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < f.radii.size(); ++k) rows.push_back({f.radii[k], f.remainder_sup[k], f.bound_rhs[k]});
  return to_csv({"rho", "remainder_sup", "bound_rhs"}, rows);
}

json osc_to_json(const std::vector<OscReport>& rows, double C, double epsilon) {
  json a = json::array();
  bool all = true;
  for (const OscReport& r : rows) {
    const double bound = C * (r.rho_quarter + epsilon * r.w_abs);
    all = all && r.within(C, epsilon);
    a.push_back({{"rho", num(r.rho)}, {"osc", num(r.osc)}, {"min_u_theta", num(r.min_u_theta)}, {"max_u_theta", num(r.max_u_theta)},
                 {"rho_quarter", num(r.rho_quarter)}, {"w_abs", num(r.w_abs)}, {"bound", num(bound)}, {"within", r.within(C, epsilon)}, {"samples", r.samples}});
  }
  return json{{"C", num(C)}, {"epsilon", num(epsilon)}, {"rows", a}, {"all_within", all}};
}

std::string osc_csv(const std::vector<OscReport>& rows, double C, double epsilon) {
  std::vector<std::vector<double>> out;
  for (const OscReport& r : rows)
    out.push_back({r.rho, r.osc, r.min_u_theta, r.max_u_theta, r.rho_quarter, r.w_abs, C * (r.rho_quarter + epsilon * r.w_abs)});
  return to_csv({"rho", "osc", "min_u_theta", "max_u_theta", "rho_quarter", "w_abs", "bound"}, out);
}

json spiral_to_json(const SpiralReport& r) {
  return json{{"C2", num(r.C2)},
              {"epsilon", num(r.epsilon)},
              {"C3", num(r.C3)},
              {"finite", std::isfinite(r.C3)},
              {"radii", num_list(r.radii)},
              {"min_u_theta", num_list(r.min_u_theta)},
              {"rhs", num_list(r.rhs)},
              {"w_inner_min", num(r.w_inner_min)}};
}

std::string spiral_csv(const SpiralReport& r) {
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < r.radii.size(); ++k) rows.push_back({r.radii[k], r.min_u_theta[k], r.rhs[k]});
  return to_csv({"rho", "min_u_theta", "rhs"}, rows);
}

json gauss_to_json(const GaussField& f, double identity, double excess) {
  return json{{"nodes", f.grid.size()},
              {"masked", f.masked_count},
              {"analytic", f.analytic},
              {"identity_deviation", num(identity)},
              {"inequality_excess", num(excess)}};
}

std::string gauss_csv(const GaussField& f) {
  std::vector<std::vector<double>> rows;
  for (long k = 0; k < f.grid.size(); ++k)
    rows.push_back({f.grid.rho(f.grid.radial_index(k)), f.grid.theta(f.grid.angular_index(k)), f.g[k].real(), f.g[k].imag(),
                    f.grad_x3[k], static_cast<double>(f.masked[k])});
  return to_csv({"rho", "theta", "g_re", "g_im", "grad_x3", "masked"}, rows);
}

json log_branch_to_json(const LogBranch& b, const PolarGrid& grid) {
  json a = json::array();
  for (std::size_t k = 0; k < b.path.size(); ++k) {
    const long n = b.path[k];
    a.push_back({{"node", n}, {"rho", num(grid.rho(grid.radial_index(n)))}, {"theta", num(grid.theta(grid.angular_index(n)))},
                 {"h1", num(b.h1[k])}, {"h2", num(b.h2[k])}});
  }
  return a;
}

json levels_to_json(const std::vector<LevelSetTrace>& traces) {
  json a = json::array();
  for (const LevelSetTrace& t : traces) {
    json lines = json::array();
    for (const Polyline& p : t.polylines) lines.push_back({{"points", p.points.size()}, {"closed", p.closed}});
    a.push_back({{"level", num(t.level)}, {"level_used", num(t.level_used)}, {"perturbed", t.perturbed}, {"components", t.components()},
                 {"polylines", lines}});
  }
  return a;
}

std::string levels_csv(const std::vector<LevelSetTrace>& traces) {
  std::vector<std::vector<double>> rows;
  for (std::size_t l = 0; l < traces.size(); ++l)
    for (std::size_t c = 0; c < traces[l].polylines.size(); ++c) {
      const Polyline& p = traces[l].polylines[c];
      for (std::size_t k = 0; k < p.points.size(); ++k)
        rows.push_back({static_cast<double>(l), static_cast<double>(c), static_cast<double>(k), p.points[k].x(), p.points[k].y(), p.points[k].z()});
    }
  return to_csv({"level", "component", "index", "x", "y", "z"}, rows);
}

json labeling_to_json(const DecompositionLabeling& d) {
  return json{{"status", d.status},
              {"epsilon0", num(d.epsilon0)},
              {"gamma0", num(d.gamma0)},
              {"r1_multiplier", num(d.r1_multiplier)},
              {"axis_point", vec_to_json(d.axis_point)},
              {"counts", {{"RA", d.count_RA}, {"RS1", d.count_RS1}, {"RS2", d.count_RS2}}},
              {"absorbed", d.absorbed},
              {"sign_RS1", d.sign_RS1},
              {"sign_RS2", d.sign_RS2},
              {"ra_violations", d.ra_violations},
              {"rs_violations", d.rs_violations}};
}

std::string labeling_csv(const DecompositionLabeling& d, const MeshPatch& m) {
  std::vector<std::vector<double>> rows;
  for (long v = 0; v < m.vertex_count(); ++v)
    rows.push_back({static_cast<double>(v), m.vertices[v].x(), m.vertices[v].y(), m.vertices[v].z(),
                    static_cast<double>(static_cast<int>(d.label[v])), d.grad_x3[v], d.u_theta[v]});
  return to_csv({"vertex", "x", "y", "z", "label", "grad_x3", "u_theta"}, rows);
}

json model_to_json(const HelicoidModel& h) {
  return json{{"pitch", num(h.pitch)}, {"rotation", mat_to_json(h.rotation)}, {"translation", vec_to_json(h.translation)}};
}

HelicoidModel model_from_json(const json& j) {
  HelicoidModel h;
  h.pitch = j.at("pitch").get<double>();
  if (j.contains("rotation")) h.rotation = mat_from_json(j.at("rotation"));
  if (j.contains("translation")) h.translation = vec_from_json(j.at("translation"));
  h.validate();
  return h;
}

json fit_to_json(const HelicoidFit& f) {
  return json{{"model", model_to_json(f.model)},
              {"residual", num(f.residual)},
              {"max_distance", num(f.max_distance)},
              {"diameter", num(f.diameter)},
              {"relative_residual", num(f.diameter > 0 ? f.residual / f.diameter : 0.0)},
              {"restarts", f.restarts},
              {"converged_restarts", f.converged_restarts},
              {"best_restart", f.best_restart},
              {"iterations", f.iterations},
              {"heuristic", f.heuristic}};
}

json distortion_to_json(const DistortionReport& r) {
  json j{{"interval", {num(r.lip_lo), num(r.lip_hi)}},
         {"lip_lo", num(r.lip_lo)},
         {"lip_hi", num(r.lip_hi)},
         {"rescale", num(r.rescale)},
         {"sup_norm", num(r.sup_norm)},
         {"vertices", r.sigma_min.size()},
         {"fit_residual", num(r.fit_residual)}};
  if (r.model) j["model"] = model_to_json(*r.model);
  return j;
}

std::string distortion_csv(const DistortionReport& r) {
  std::vector<std::vector<double>> rows;
  for (std::size_t v = 0; v < r.sigma_min.size(); ++v) rows.push_back({static_cast<double>(v), r.sigma_min[v], r.sigma_max[v]});
  return to_csv({"vertex", "sigma_min", "sigma_max"}, rows);
}

json embeddedness_to_json(const EmbeddednessVerdict& v, const WeierstrassAlpha& a, double t0, double t1, int n, double tol) {
  json j{{"alpha", {{"alpha1", num(a.alpha1)}, {"alpha2", num(a.alpha2)}}},
         {"window", {num(t0), num(t1)}},
         {"samples", n},
         {"tol", num(tol)},
         {"embedded", v.embedded},
         {"min_separation", num(v.min_separation)}};
  if (!v.embedded) j["witness"] = {num(v.t_a), num(v.t_b)};
  return j;
}

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                           const std::vector<ChartSeries>& series, bool log_x, bool log_y) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  const double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
  auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!log_x || x > 0) && (!log_y || y > 0);
  };
  double x0 = kInfinity, x1 = -kInfinity, y0 = kInfinity, y1 = -kInfinity;
  for (const ChartSeries& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!usable(s.x[k], s.y[k])) continue;
      x0 = std::min(x0, tx(s.x[k]));
      x1 = std::max(x1, tx(s.x[k]));
      y0 = std::min(y0, ty(s.y[k]));
      y1 = std::max(y1, ty(s.y[k]));
    }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-300) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12 * std::max(1.0, std::abs(y0))) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double x) { return L + (tx(x) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (ty(y) - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" << escape(title) << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
    const double sx = L + (W - L - R) * k / 4.0, sy = H - B - (H - T - B) * k / 4.0;
    o << "<text x=\"" << fmt(sx) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
      << tick(log_x ? std::pow(10.0, fx) : fx) << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << fmt(sy + 4) << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << tick(log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
    << escape(xlabel) << "</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">" << escape(ylabel) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % 6];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t k = 0; k < series[s].x.size(); ++k) {
      if (!usable(series[s].x[k], series[s].y[k])) continue;
      o << (first ? "" : " ") << fmt(px(series[s].x[k])) << ',' << fmt(py(series[s].y[k]));
      first = false;
    }
    o << "\"/>\n";
    o << "<text x=\"" << L + 10 << "\" y=\"" << T + 16 + 14 * s << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">"
      << escape(series[s].label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace hf

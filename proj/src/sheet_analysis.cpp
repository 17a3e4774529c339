#include "hf/sheet_analysis.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace hf {

namespace {

double max_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace

FlatnessField flatness_terms(const MultiGraph& u, Exec exec) {
  u.validate();
  Separation sep = separation(u);
  if (sep.empty) throw Error("flatness_terms: separation overlap is empty (angular span below one turn)");
  const double scale = max_abs(u.values);
  std::vector<long> singular;
  for (long k = 0; k < static_cast<long>(sep.w.size()); ++k)
    if (std::abs(sep.w[k]) <= 1e-14 * scale) singular.push_back(k);
  if (!singular.empty()) {
    std::ostringstream os;
    os << "flatness_terms: separation vanishes at " << singular.size()
       << " node(s); the graph is not embedded (first overlap node " << singular.front() << ")";
    throw Error(os.str(), singular);
  }

  const MultiGraph w = separation_graph(u);
  const Derivatives du = derivatives(u, DerivativeSource::automatic, exec);
  const Derivatives dw = derivatives(w, DerivativeSource::automatic, exec);
  const PolarGrid& og = w.grid;
  const long n = og.size();
  FlatnessField f{og, std::vector<double>(n), std::vector<double>(n), std::vector<double>(n),
                  std::vector<double>(n), std::vector<double>(n), 0.0, -1};
  const int count = og.n_theta();
  for_each_index(n, exec, [&](long k) {
    const int i = static_cast<int>(k / count), j = static_cast<int>(k % count);
    const long ku = u.grid.index(i, j);
    const double rho = og.rho(i);
    const double aw = std::abs(w.values[k]);
    f.grad_term[k] = du.grad[ku].norm();
    f.hess_term[k] = rho * du.hess[ku].norm();
    f.wgrad_term[k] = 4.0 * rho * dw.grad[k].norm() / aw;
    f.whess_term[k] = rho * rho * dw.hess[k].norm() / aw;
    f.value[k] = f.grad_term[k] + f.hess_term[k] + f.wgrad_term[k] + f.whess_term[k];
  });
  for (long k = 0; k < n; ++k)
    if (f.argmax < 0 || f.value[k] > f.sup) {
      f.sup = f.value[k];
      f.argmax = k;
    }
  return f;
}

std::string to_string(SheetKind k) { return k == SheetKind::weak ? "weak" : "strong"; }

SheetKind sheet_kind_from_string(const std::string& s) {
  if (s == "weak") return SheetKind::weak;
  if (s == "strong") return SheetKind::strong;
  throw Error("unknown sheet kind '" + s + "' (expected weak or strong)");
}

std::vector<std::pair<double, double>> ray_gradient(const MultiGraph& u, Exec exec) {
  const PolarGrid& g = u.grid;
  const double x = g.angular_position(0.0);
  if (x < -1e-9 || x > g.n_theta() - 1 + 1e-9) throw Error("ray_gradient: theta = 0 is outside the domain");
  int j0 = std::clamp(static_cast<int>(std::floor(x)), 0, g.n_theta() - 1);
  double frac = x - j0;
  if (j0 == g.n_theta() - 1) {
    j0 = g.n_theta() - 2;
    frac = 1.0;
  }
  if (std::abs(frac) < 1e-9) frac = 0.0;
  const Derivatives d = derivatives(u, DerivativeSource::automatic, exec);
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < g.n_rho(); ++i) {
    const double a = d.grad[g.index(i, j0)].norm();
    const double b = d.grad[g.index(i, j0 + 1)].norm();
    out.emplace_back(g.rho(i), frac == 0.0 ? a : (1.0 - frac) * a + frac * b);
  }
  return out;
}

DecayFit fit_decay(const std::vector<double>& rho, const std::vector<double>& value) {
  DecayFit best;
  const std::size_t n = rho.size();
  best.samples = static_cast<int>(n);
  if (n < 3 || value.size() != n) return best;
  double best_ssr = kInfinity;
  for (int step = 0; step < 300; ++step) {
    const double p = -3.0 + 0.01 * step;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double x = std::pow(rho[k], p);
      sx += x;
      sy += value[k];
      sxx += x * x;
      sxy += x * value[k];
    }
    const double det = n * sxx - sx * sx;
    if (!(std::abs(det) > 1e-300)) continue;
    const double B = (n * sxy - sx * sy) / det;
    const double L = (sy - B * sx) / n;
    double ssr = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double r = L + B * std::pow(rho[k], p) - value[k];
      ssr += r * r;
    }
    if (ssr < best_ssr) {
      best_ssr = ssr;
      best.valid = true;
      best.L = L;
      best.B = B;
      best.p = p;
      best.rms = std::sqrt(ssr / n);
    }
  }
  return best;
}

Vec3 asymptotic_normal(const MultiGraph& u, Exec exec) {
  const PolarGrid& g = u.grid;
  const Derivatives d = derivatives(u, DerivativeSource::automatic, exec);
  const double r_med = g.rho(g.n_rho() / 2);
  Vec3 acc = Vec3::Zero();
  for (long k = 0; k < g.size(); ++k) {
    const int i = g.radial_index(k);
    if (g.rho(i) < r_med) continue;
    const Vec2& p = d.grad[k];
    acc += Vec3(-p.x(), -p.y(), 1.0) / std::sqrt(1.0 + p.squaredNorm());
  }
  return acc.normalized();
}

SheetCertificate certify_sheet(const MultiGraph& u, double epsilon, double N, SheetKind kind,
                               double scale, const CertifyOptions& opt) {
  u.validate();
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw Error("certify_sheet: epsilon must be >= 0");
  if (!(N > 0.0)) throw Error("certify_sheet: N must be positive");
  if (!(scale > 0.0)) throw Error("certify_sheet: scale must be positive");
  if (kind == SheetKind::strong && !(epsilon < 1.0 / kTwoPi))
    throw Error("certify_sheet: strong sheets need epsilon < 1/(2 pi)");
  const PolarGrid& g = u.grid;
  const PolarRect& r = g.rect();
  const double tlo = -kPi * N, thi = kPi * N;
  const double slack = 1e-9;
  if (r.r1 > scale * (1.0 + 1e-12) || r.r2 <= scale || r.theta1 > tlo + slack || r.theta2 < thi - slack) {
    std::ostringstream os;
    os << "certify_sheet: domain [" << r.r1 << ", " << r.r2 << "] x [" << r.theta1 << ", " << r.theta2
       << "] does not cover the required rectangle [" << scale << ", R] x [" << tlo << ", " << thi << "]";
    throw Error(os.str());
  }

  SheetCertificate c;
  c.kind = kind;
  c.epsilon = epsilon;
  c.N = N;
  c.scale = scale;
  c.center = u.center;
  c.r_max = r.r2;

  std::vector<long> region;
  for (int i = 0; i < g.n_rho(); ++i) {
    if (g.rho(i) < scale * (1.0 - 1e-12)) continue;
    for (int j = 0; j < g.n_theta(); ++j)
      if (g.theta(j) >= tlo - slack && g.theta(j) <= thi + slack) region.push_back(g.index(i, j));
  }
  c.nodes_checked = static_cast<int>(region.size());

  const Derivatives d = derivatives(u, DerivativeSource::automatic, opt.exec);
  c.residual_bound = opt.residual_tol;
  if (u.solver_residual) {
    c.residual_source = "solver";
    c.residual_sup = *u.solver_residual;
  } else {
    c.residual_source = d.analytic ? "analytic" : "finite-difference";
    const std::vector<double> res = mse_residual(u, DerivativeSource::automatic, opt.exec);
    for (long k : region) c.residual_sup = std::max(c.residual_sup, std::abs(res[k]));
  }
  c.residual_ok = c.residual_sup <= c.residual_bound;

  bool cone_all = true;
  for (long k : region) {
    const double rho = g.rho(g.radial_index(k));
    c.gradient_sup = std::max(c.gradient_sup, d.grad[k].norm());
    c.cone_sup = std::max(c.cone_sup, std::abs(u.values[k]) / rho);
    if (!cone_membership(u.local_point(k), Cone{Vec3::Zero(), epsilon})) cone_all = false;
  }
  c.gradient_ok = c.gradient_sup <= epsilon;
  c.cone_ok = cone_all;

  // Overlap nodes inside the certified region.
  const Separation sep = separation(u);
  std::vector<long> overlap;
  if (!sep.empty) {
    const int count = sep.grid->n_theta();
    for (long k : region) {
      const int j = g.angular_index(k);
      if (j < count) overlap.push_back(static_cast<long>(g.radial_index(k)) * count + j);
    }
  }
  const double uscale = max_abs(u.values);
  c.embedded = true;
  bool pos = true, neg = true;
  for (long k : overlap) {
    const double w = sep.w[k];
    if (std::abs(w) <= 1e-14 * uscale) c.embedded = false;
    if (!(w > 0)) pos = false;
    if (!(w < 0)) neg = false;
  }
  c.separation_sign = overlap.empty() ? 0 : (pos ? 1 : (neg ? -1 : 0));

  c.margin = std::min({c.residual_bound - c.residual_sup, epsilon - c.gradient_sup, epsilon - c.cone_sup});

  if (kind == SheetKind::strong) {
    FlatnessField f = flatness_terms(u, opt.exec);
    double sup = 0.0;
    for (long k : overlap) sup = std::max(sup, f.value[k]);
    c.flatness_sup = sup;
    c.flatness = std::move(f);
    c.flatness_ok = sup <= epsilon;
    c.margin = std::min(c.margin, epsilon - sup);

    const auto ray = ray_gradient(u, opt.exec);
    std::vector<double> rr, vv;
    for (const auto& [rho, v] : ray)
      if (rho >= scale * (1.0 - 1e-12)) {
        rr.push_back(rho);
        vv.push_back(v);
      }
    c.gradient_at_rmax = vv.empty() ? 0.0 : vv.back();
    const std::size_t half = rr.size() / 2;
    c.decay = fit_decay({rr.begin() + half, rr.end()}, {vv.begin() + half, vv.end()});
    c.normalization_ok = c.decay.valid && c.decay.p <= opt.normalization_exponent &&
                         std::abs(c.decay.L) <= opt.normalization_limit;
    if (c.decay.valid) c.margin = std::min(c.margin, opt.normalization_limit - std::abs(c.decay.L));
  }

  c.tilt = std::acos(std::clamp(asymptotic_normal(u, opt.exec).z(), -1.0, 1.0));

  if (!c.residual_ok) c.failures.push_back("minimal surface residual above bound");
  if (!c.gradient_ok) c.failures.push_back("gradient exceeds epsilon");
  if (!c.cone_ok) c.failures.push_back("graph leaves the cone complement");
  if (!c.embedded) c.failures.push_back("not embedded as multigraph");
  if (!c.flatness_ok) c.failures.push_back("flatness condition exceeds epsilon");
  if (!c.normalization_ok) c.failures.push_back("gradient does not decay at infinity");
  c.verdict = c.failures.empty();
  return c;
}

DecayReport decay_check(const MultiGraph& u, double epsilon, double c_decay, double rho_min, Exec exec) {
  if (!(epsilon >= 0.0)) throw Error("decay_check: epsilon must be >= 0");
  DecayReport rep;
  for (const auto& [rho, v] : ray_gradient(u, exec)) {
    if (rho < rho_min * (1.0 - 1e-12)) continue;
    ++rep.samples;
    const double bound = epsilon * std::pow(rho, -5.0 / 12.0);
    const double ratio = bound > 0.0 ? v / bound : (v > 0.0 ? kInfinity : 0.0);
    if (rep.samples == 1 || ratio > rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.worst_rho = rho;
    }
  }
  if (rep.samples == 0) throw Error("decay_check: no theta = 0 nodes at rho >= rho_min");
  rep.pass = rep.worst_ratio <= c_decay;
  return rep;
}

namespace {

// Vertices within geodesic (edge-path) distance r of v, with distances.
std::vector<std::pair<int, double>> geodesic_ball(const MeshPatch& m, const MeshTopology& topo, int v, double r) {
  std::vector<std::pair<int, double>> out;
  std::unordered_map<int, double> best{{v, 0.0}};
  std::unordered_set<int> done;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  pq.push({0.0, v});
  while (!pq.empty()) {
    auto [dist, x] = pq.top();
    pq.pop();
    if (!done.insert(x).second) continue;
    out.push_back({x, dist});
    for (int y : topo.neighbors[x]) {
      const double nd = dist + (m.vertices[x] - m.vertices[y]).norm();
      if (nd > r) continue;
      auto it = best.find(y);
      if (it == best.end() || nd < it->second) {
        best[y] = nd;
        pq.push({nd, y});
      }
    }
  }
  return out;
}

}  // namespace

BlowUpReport detect_blowup_pairs(const MeshPatch& m, double C, const BlowUpOptions& opt) {
  if (m.A2.empty() || static_cast<long>(m.A2.size()) != m.vertex_count())
    throw Error("detect_blowup_pairs: mesh carries no |A|^2");
  if (!(C > 0.0)) throw Error("detect_blowup_pairs: C must be positive");
  const long nv = m.vertex_count();
  const MeshTopology topo = build_topology(m);

  std::vector<int> order(nv);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return m.A2[a] > m.A2[b]; });

  std::vector<Vec3> boundary_pts;
  std::vector<int> boundary_ids;
  for (long v = 0; v < nv; ++v)
    if (topo.boundary_vertex[v]) {
      boundary_pts.push_back(m.vertices[v]);
      boundary_ids.push_back(static_cast<int>(v));
    }
  const double cell = std::max(patch_scale(m) / 64.0, 1e-12);
  const PointGrid bgrid(boundary_pts, cell);

  double max_scan = 0.0;
  for (double r : opt.scan_radii) max_scan = std::max(max_scan, r);
  std::vector<double> radii = opt.scan_radii;
  std::sort(radii.begin(), radii.end());

  // 0: skipped, 1: fails the sup test, 2: passes but the ball leaves the mesh, 3: passes.
  std::vector<char> status(nv, 0);
  std::vector<double> scan_r(nv, 0.0);
  for_each_index_dynamic(nv, opt.exec, [&](long v) {
    const double a2 = m.A2[v];
    if (!(a2 > 0.0)) return;
    if (!radii.empty()) {
      const double d = (m.vertices[v] - opt.scan_center).norm();
      if (d > max_scan) return;
      scan_r[v] = *std::lower_bound(radii.begin(), radii.end(), d);
    }
    const double s = C / std::sqrt(a2);
    const double thr = 4.0 * a2 * (1.0 + opt.tol);
    const Vec3& y = m.vertices[v];
    const int comp = topo.component[v];
    bool exits = false;
    if (opt.intrinsic) {
      for (const auto& [x, dist] : geodesic_ball(m, topo, static_cast<int>(v), s)) {
        if (m.A2[x] > thr) {
          status[v] = 1;
          return;
        }
        if (topo.boundary_vertex[x]) exits = true;
      }
    } else {
      for (int x : order) {
        if (!(m.A2[x] > thr)) break;
        if (topo.component[x] == comp && (m.vertices[x] - y).norm() <= s) {
          status[v] = 1;
          return;
        }
      }
      for (int b : bgrid.within(y, s))
        if (topo.component[boundary_ids[b]] == comp) {
          exits = true;
          break;
        }
    }
    status[v] = exits ? 2 : 3;
  });

  BlowUpReport rep;
  for (long v = 0; v < nv; ++v) {
    if (status[v] == 0) continue;
    ++rep.candidates;
    if (status[v] == 2) ++rep.discarded_boundary;
    if (status[v] != 3) continue;
    bool local_max = true;
    for (int x : topo.neighbors[v])
      if (m.A2[x] > m.A2[v]) local_max = false;
    if (!local_max) {
      ++rep.discarded_duplicate;
      continue;
    }
    BlowUpPair p;
    p.y = m.vertices[v];
    p.A2 = m.A2[v];
    p.s = C / std::sqrt(p.A2);
    p.C = C;
    p.vertex = v;
    p.scan_radius = scan_r[v];
    rep.pairs.push_back(p);
  }
  std::stable_sort(rep.pairs.begin(), rep.pairs.end(), [](const BlowUpPair& a, const BlowUpPair& b) {
    if (a.y.z() != b.y.z()) return a.y.z() < b.y.z();
    return a.A2 > b.A2;
  });
  return rep;
}

std::string to_string(RegionReason r) {
  switch (r) {
    case RegionReason::inside: return "inside";
    case RegionReason::rho_below_range: return "rho below range";
    case RegionReason::rho_above_range: return "rho above range";
    case RegionReason::on_axis: return "on axis";
    case RegionReason::not_above_bottom: return "not above bottom sheet";
    case RegionReason::not_below_top: return "not below top sheet";
  }
  return "unknown";
}

double interpolate_bilinear(const MultiGraph& u, double rho, double theta) {
  const PolarGrid& g = u.grid;
  const double x = g.radial_position(rho), y = g.angular_position(theta);
  const double eps = 1e-9;
  if (x < -eps || x > g.n_rho() - 1 + eps || y < -eps || y > g.n_theta() - 1 + eps)
    throw Error("interpolate_bilinear: point outside the grid");
  const int i = std::clamp(static_cast<int>(std::floor(x)), 0, g.n_rho() - 2);
  const int j = std::clamp(static_cast<int>(std::floor(y)), 0, g.n_theta() - 2);
  const double a = std::clamp(x - i, 0.0, 1.0), b = std::clamp(y - j, 0.0, 1.0);
  return (1 - a) * (1 - b) * u.at(i, j) + a * (1 - b) * u.at(i + 1, j) + (1 - a) * b * u.at(i, j + 1) +
         a * b * u.at(i + 1, j + 1);
}

RegionMembership region_E_membership(const MultiGraph& u1, const Vec3& p, double N) {
  const PolarRect& r = u1.grid.rect();
  const double need_lo = -kTwoPi - kPi * N, need_hi = (N + 2.0) * kPi;
  if (r.theta1 > need_lo + 1e-9 || r.theta2 < need_hi - 1e-9) {
    std::ostringstream os;
    os << "region_E_membership: u1 must cover theta in [" << need_lo << ", " << need_hi << "]";
    throw Error(os.str());
  }
  RegionMembership out;
  const double rho = std::hypot(p.x(), p.y());
  if (rho == 0.0) {
    out.reason = RegionReason::on_axis;
    return out;
  }
  if (rho < r.r1) {
    out.reason = RegionReason::rho_below_range;
    return out;
  }
  if (rho > r.r2) {
    out.reason = RegionReason::rho_above_range;
    return out;
  }
  double t = std::atan2(p.y(), p.x());
  if (t >= 0.0) t -= kTwoPi;
  out.theta = t;
  out.bottom = interpolate_bilinear(u1, rho, t - kPi * N);
  out.top = interpolate_bilinear(u1, rho, t + (N + 2.0) * kPi);
  if (!(p.z() > out.bottom)) {
    out.reason = RegionReason::not_above_bottom;
  } else if (!(p.z() < out.top)) {
    out.reason = RegionReason::not_below_top;
  } else {
    out.inside = true;
    out.reason = RegionReason::inside;
  }
  return out;
}

}  // namespace hf

#include "hf/gauss.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <sstream>

namespace hf {

GaussField gauss_from_graph(const MultiGraph& u, Exec exec) {
  u.validate();
  const PolarGrid& grid = u.grid;
  const Derivatives d = derivatives(u, DerivativeSource::automatic, exec);
  const long n = grid.size();
  GaussField f{grid, std::vector<Complex>(n), std::vector<double>(n), std::vector<char>(n, 0), 0, d.analytic};
  for_each_index(n, exec, [&](long k) {
    const double rho = grid.rho(grid.radial_index(k)), theta = grid.theta(grid.angular_index(k));
    const PolarJet& j = d.polar[k];
    const double p = j.u_r, q = j.u_t / rho;
    const double grad2 = p * p + q * q;
    // Independent route: unit normal of Phi_rho x Phi_theta, then |e3 - (e3.n) n|.
    const double c = std::cos(theta), s = std::sin(theta);
    const double h1 = j.u_t * s - j.u_r * rho * c, h2 = -j.u_r * rho * s - j.u_t * c;
    const double h = std::hypot(h1, h2);
    f.grad_x3[k] = h / std::hypot(h, rho);
    if (std::sqrt(grad2) < 1e-10) {
      f.masked[k] = 1;
      f.g[k] = Complex(0.0, 0.0);
      return;
    }
    const double W = std::sqrt(1.0 + grad2);
    const double inv = (W + 1.0) / grad2;  // 1 / (W - 1)
    f.g[k] = -inv * Complex(p, q) * std::polar(1.0, theta);
  });
  for (char m : f.masked) f.masked_count += m;
  if (f.masked_count == n) throw Error("gauss_from_graph: flat patch (|grad u| < 1e-10 at every node)");
  return f;
}

double check_gauss_identity(const GaussField& f) {
  double dev = 0.0;
  long used = 0;
  for (std::size_t k = 0; k < f.g.size(); ++k) {
    if (f.masked[k]) continue;
    ++used;
    const double a = std::abs(f.g[k]);
    dev = std::max(dev, std::abs(f.grad_x3[k] - 2.0 * a / (1.0 + a * a)));
  }
  if (used == 0) throw Error("check_gauss_identity: flat patch (every node masked)");
  return dev;
}

double gauss_inequality_excess(const GaussField& f) {
  double worst = -kInfinity;
  for (std::size_t k = 0; k < f.g.size(); ++k) {
    if (f.masked[k]) continue;
    const double h1 = std::log(std::abs(f.g[k]));
    worst = std::max(worst, f.grad_x3[k] - 2.0 * std::exp(-std::abs(h1)));
  }
  if (worst == -kInfinity) throw Error("gauss_inequality_excess: flat patch (every node masked)");
  return worst;
}

LogBranch log_gauss_branch(const GaussField& f, const std::vector<long>& path) {
  if (path.empty()) throw Error("log_gauss_branch: empty path");
  LogBranch b;
  b.path = path;
  const long n = static_cast<long>(f.g.size());
  for (std::size_t k = 0; k < path.size(); ++k) {
    const long v = path[k];
    if (v < 0 || v >= n) throw Error("log_gauss_branch: node outside the field", {v});
    if (f.masked[v]) throw Error("log_gauss_branch: g undefined (masked) on the path", {v});
    b.h1.push_back(std::log(std::abs(f.g[v])));
    if (k == 0) {
      b.h2.push_back(std::arg(f.g[v]));
      continue;
    }
    const double jump = std::arg(f.g[v] / f.g[path[k - 1]]);
    if (std::abs(jump) > kPi / 2.0) {
      std::ostringstream os;
      os << "log_gauss_branch: path too coarse (phase jump " << jump << " between nodes " << path[k - 1]
         << " and " << v << ")";
      throw Error(os.str(), {path[k - 1], v});
    }
    b.h2.push_back(b.h2.back() + jump);
  }
  return b;
}

LevelSetTrace trace_level_set(const MeshPatch& m, double c) { return trace_level_set(m, build_topology(m), c); }

LevelSetTrace trace_level_set(const MeshPatch& m, const MeshTopology& topo, double c) {
  if (m.vertices.empty()) throw Error("trace_level_set: empty mesh");
  double lo = kInfinity, hi = -kInfinity;
  for (const auto& v : m.vertices) {
    lo = std::min(lo, v.z());
    hi = std::max(hi, v.z());
  }
  if (!(c >= lo && c <= hi)) {
    std::ostringstream os;
    os << "trace_level_set: level " << c << " outside the x3 range [" << lo << ", " << hi << "]";
    throw Error(os.str());
  }
  LevelSetTrace tr;
  tr.level = c;
  const double delta = 1e-12 * (hi - lo);
  double cu = c;
  for (int attempt = 0; attempt < 16; ++attempt) {
    bool hit = false;
    for (const auto& v : m.vertices)
      if (v.z() == cu) {
        hit = true;
        break;
      }
    if (!hit) break;
    tr.perturbed = true;
    cu += (cu + delta <= hi) ? delta : -delta;
  }
  tr.level_used = cu;

  const long ne = static_cast<long>(topo.edges.size());
  auto positive = [&](int v) { return m.vertices[v].z() - cu >= 0.0; };
  std::vector<char> crossing(ne, 0);
  std::vector<Vec3> point(ne);
  for (long e = 0; e < ne; ++e) {
    const auto& E = topo.edges[e];
    if (positive(E.a) == positive(E.b)) continue;
    crossing[e] = 1;
    const Vec3& pa = m.vertices[E.a];
    const Vec3& pb = m.vertices[E.b];
    const double fa = pa.z() - cu, fb = pb.z() - cu;
    point[e] = pa + (fa / (fa - fb)) * (pb - pa);
  }
  for (long e : topo.nonmanifold_edges)
    if (crossing[e]) throw Error("trace_level_set: level set crosses a non-manifold edge", {e});

  const long nt = m.triangle_count();
  std::vector<std::array<int, 2>> seg(nt, {-1, -1});
  std::vector<std::vector<int>> edge_tris(ne);
  for (long t = 0; t < nt; ++t) {
    int k = 0;
    for (int e : topo.triangle_edges[t])
      if (crossing[e] && k < 2) seg[t][k++] = e;
    if (k == 2)
      for (int e : seg[t]) edge_tris[e].push_back(static_cast<int>(t));
    else
      seg[t] = {-1, -1};
  }

  std::vector<char> used(nt, 0);
  auto walk = [&](int e0, int t0) {
    Polyline pl;
    int e = e0, t = t0;
    pl.points.push_back(point[e]);
    pl.edges.push_back(e);
    while (t >= 0 && !used[t]) {
      used[t] = 1;
      pl.triangles.push_back(t);
      const int next = seg[t][0] == e ? seg[t][1] : seg[t][0];
      pl.points.push_back(point[next]);
      pl.edges.push_back(next);
      e = next;
      t = -1;
      for (int cand : edge_tris[e])
        if (!used[cand]) t = cand;
    }
    return pl;
  };
  for (long e = 0; e < ne; ++e)
    if (crossing[e] && edge_tris[e].size() == 1 && !used[edge_tris[e][0]])
      tr.polylines.push_back(walk(static_cast<int>(e), edge_tris[e][0]));
  for (long t = 0; t < nt; ++t)
    if (seg[t][0] >= 0 && !used[t]) {
      Polyline pl = walk(seg[t][0], static_cast<int>(t));
      pl.closed = true;
      pl.points.pop_back();
      pl.edges.pop_back();
      tr.polylines.push_back(std::move(pl));
    }
  return tr;
}

std::vector<LevelSetTrace> trace_level_sets(const MeshPatch& m, const std::vector<double>& levels, Exec exec) {
  const MeshTopology topo = build_topology(m);
  const long n = static_cast<long>(levels.size());
  std::vector<LevelSetTrace> out(n);
  std::vector<std::exception_ptr> errors(n);
  for_each_index_dynamic(n, exec, [&](long k) {
    try {
      out[k] = trace_level_set(m, topo, levels[k]);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::string to_string(Region r) {
  switch (r) {
    case Region::RA: return "R_A";
    case Region::RS1: return "R_S1";
    case Region::RS2: return "R_S2";
  }
  return "unknown";
}

DecompositionLabeling decompose(const MeshPatch& m, const std::vector<BlowUpPair>& pairs,
                                const DecomposeOptions& opt) {
  if (!(opt.epsilon0 > 0.0 && opt.epsilon0 < 1.0)) throw Error("decompose: epsilon0 must lie in (0, 1)");
  if (!(opt.r1_multiplier > 0.0)) throw Error("decompose: R1 multiplier must be positive");
  if (m.normals.size() != m.vertices.size()) throw Error("decompose: mesh carries no normals");
  if (m.A2.size() != m.vertices.size()) throw Error("decompose: mesh carries no |A|^2");
  const long nv = m.vertex_count();
  const MeshTopology topo = build_topology(m);

  DecompositionLabeling L;
  L.epsilon0 = opt.epsilon0;
  L.gamma0 = std::log(2.0 / opt.epsilon0);
  L.r1_multiplier = opt.r1_multiplier;
  L.grad_x3.resize(nv);
  L.u_theta.resize(nv);
  L.label.assign(nv, Region::RS1);
  for (long v = 0; v < nv; ++v) {
    const double n3 = m.normals[v].z();
    L.grad_x3[v] = std::sqrt(std::max(0.0, 1.0 - n3 * n3));
  }

  Vec3 axis = Vec3::Zero();
  if (opt.axis_point) {
    axis = *opt.axis_point;
  } else if (!pairs.empty()) {
    for (const auto& p : pairs) axis += p.y;
    axis /= static_cast<double>(pairs.size());
  }
  axis.z() = 0.0;
  L.axis_point = axis;
  for (long v = 0; v < nv; ++v) {
    const Vec3& n = m.normals[v];
    const Vec3 x = m.vertices[v] - axis;
    L.u_theta[v] = std::abs(n.z()) > 1e-8 ? (n.x() * x.y() - n.y() * x.x()) / n.z()
                                          : std::numeric_limits<double>::quiet_NaN();
  }

  if (pairs.empty()) {
    L.status = "flat - decomposition vacuous";
    for (long v = 0; v < nv; ++v) L.label[v] = m.normals[v].z() > 0.0 ? Region::RS1 : Region::RS2;
    for (auto r : L.label) (r == Region::RS1 ? L.count_RS1 : L.count_RS2)++;
    return L;
  }
  L.status = "ok";

  std::vector<char> cand(nv, 0);
  for (long v = 0; v < nv; ++v) {
    if (L.grad_x3[v] < opt.epsilon0) continue;
    for (const auto& p : pairs)
      if ((m.vertices[v] - p.y).norm() <= opt.r1_multiplier * p.s) {
        cand[v] = 1;
        break;
      }
  }

  auto flood = [&](const std::vector<int>& seeds, const std::vector<char>& allowed, std::vector<char>& mark) {
    std::vector<int> stack;
    for (int s : seeds)
      if (allowed[s] && !mark[s]) {
        mark[s] = 1;
        stack.push_back(s);
      }
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      for (int y : topo.neighbors[x])
        if (allowed[y] && !mark[y]) {
          mark[y] = 1;
          stack.push_back(y);
        }
    }
  };

  std::vector<int> centers;
  for (const auto& p : pairs) {
    long v = p.vertex;
    if (v < 0 || v >= nv || (m.vertices[v] - p.y).norm() > 1e-9 * (1.0 + p.y.norm())) {
      double best = kInfinity;
      for (long k = 0; k < nv; ++k) {
        const double d = (m.vertices[k] - p.y).norm();
        if (d < best) {
          best = d;
          v = k;
        }
      }
    }
    centers.push_back(static_cast<int>(v));
  }
  std::vector<char> ra(nv, 0);
  flood(centers, cand, ra);

  // Absorb complementary components that never reach the mesh boundary.
  std::vector<char> rest(nv), seen(nv, 0);
  for (long v = 0; v < nv; ++v) rest[v] = !ra[v];
  for (long v = 0; v < nv; ++v) {
    if (!rest[v] || seen[v]) continue;
    std::vector<char> comp(nv, 0);
    flood({static_cast<int>(v)}, rest, comp);
    bool touches = false;
    std::vector<int> members;
    for (long k = 0; k < nv; ++k)
      if (comp[k]) {
        seen[k] = 1;
        members.push_back(static_cast<int>(k));
        if (topo.boundary_vertex[k]) touches = true;
      }
    if (!touches) {
      for (int k : members) ra[k] = 1;
      L.absorbed += static_cast<long>(members.size());
    }
  }

  for (long v = 0; v < nv; ++v) {
    if (ra[v]) L.label[v] = Region::RA;
    else L.label[v] = m.normals[v].z() > 0.0 ? Region::RS1 : Region::RS2;
  }
  double sum1 = 0.0, sum2 = 0.0;
  for (long v = 0; v < nv; ++v) {
    if (L.label[v] == Region::RA) continue;
    const double ut = std::isnan(L.u_theta[v]) ? 0.0 : L.u_theta[v];
    (L.label[v] == Region::RS1 ? sum1 : sum2) += ut;
  }
  L.sign_RS1 = sum1 >= 0.0 ? 1 : -1;
  L.sign_RS2 = sum2 >= 0.0 ? 1 : -1;
  for (long v = 0; v < nv; ++v) {
    switch (L.label[v]) {
      case Region::RA:
        ++L.count_RA;
        if (L.grad_x3[v] < opt.epsilon0) L.ra_violations.push_back(v);
        break;
      case Region::RS1:
      case Region::RS2: {
        (L.label[v] == Region::RS1 ? L.count_RS1 : L.count_RS2)++;
        const int sign = L.label[v] == Region::RS1 ? L.sign_RS1 : L.sign_RS2;
        if (std::isnan(L.u_theta[v]) || !(sign * L.u_theta[v] > 0.0)) L.rs_violations.push_back(v);
        break;
      }
    }
  }
  return L;
}

}  // namespace hf

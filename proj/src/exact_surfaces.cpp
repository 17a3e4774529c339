#include "hf/exact_surfaces.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <sstream>

namespace hf {

namespace {

Mat3 shape_from_frames(const Vec3& xu, const Vec3& xv, const Vec3& n, const Vec3& nu,
                       const Vec3& nv) {
  Mat3 T, dN = Mat3::Zero();
  T << xu, xv, n;
  dN.col(0) = nu;
  dN.col(1) = nv;
  Mat3 M = dN * T.inverse();
  return 0.5 * (M + M.transpose());
}

// Keeps triangles whose vertices all pass `keep`, then drops unused vertices.
MeshPatch compact(MeshPatch m, const std::vector<char>& keep) {
  std::vector<Triangle> tris;
  for (const auto& t : m.triangles)
    if (keep[t[0]] && keep[t[1]] && keep[t[2]]) tris.push_back(t);
  std::vector<int> used(m.vertices.size(), 0);
  for (const auto& t : tris)
    for (int c : t) used[c] = 1;
  std::vector<int> remap(m.vertices.size(), -1);
  MeshPatch out;
  for (std::size_t v = 0; v < m.vertices.size(); ++v) {
    if (!used[v]) continue;
    remap[v] = static_cast<int>(out.vertices.size());
    out.vertices.push_back(m.vertices[v]);
    if (!m.normals.empty()) out.normals.push_back(m.normals[v]);
    if (!m.A2.empty()) out.A2.push_back(m.A2[v]);
    if (!m.shape.empty()) out.shape.push_back(m.shape[v]);
  }
  for (auto& t : tris) {
    for (int& c : t) c = remap[c];
    out.triangles.push_back(t);
  }
  return out;
}

void add_cell_triangles(std::vector<Triangle>& tris, int v00, int v10, int v11, int v01) {
  tris.push_back({v00, v10, v11});
  tris.push_back({v00, v11, v01});
}

}  // namespace

void HelicoidModel::validate() const {
  if (pitch == 0.0 || !std::isfinite(pitch)) throw Error("HelicoidModel: pitch must be nonzero");
  if ((rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-12)
    throw Error("HelicoidModel: rotation is not orthonormal");
}

Vec3 HelicoidModel::local_point(double s, double t) const {
  return {s * std::cos(t), s * std::sin(t), pitch * t};
}

Vec3 HelicoidModel::normal(double s, double t) const {
  const Vec3 v(pitch * std::sin(t), -pitch * std::cos(t), s);
  return rotation * v.normalized();
}

Mat3 HelicoidModel::shape(double s, double t) const {
  const double a = pitch;
  const Vec3 xs(std::cos(t), std::sin(t), 0.0);
  const Vec3 xt(-s * std::sin(t), s * std::cos(t), a);
  const Vec3 v(a * std::sin(t), -a * std::cos(t), s);
  const double len = v.norm();
  const Vec3 n = v / len;
  const Vec3 vs(0.0, 0.0, 1.0);
  const Vec3 vt(a * std::cos(t), a * std::sin(t), 0.0);
  const Vec3 ns = (vs - n * n.dot(vs)) / len;
  const Vec3 nt = (vt - n * n.dot(vt)) / len;
  return rotation * shape_from_frames(xs, xt, n, ns, nt) * rotation.transpose();
}

double HelicoidModel::A2(double s) const {
  const double a2 = pitch * pitch;
  const double d = a2 + s * s;
  return 2.0 * a2 / (d * d);
}

HelicoidModel::Projection HelicoidModel::project(const Vec3& p) const {
  const Vec3 q = rotation.transpose() * (p - translation);
  const double a = pitch;
  const double rho = std::hypot(q.x(), q.y());
  const double z = q.z();
  Projection best;
  if (rho == 0.0) {
    best.t = z / a;
    best.s = 0.0;
    best.distance = 0.0;
    return best;
  }
  const double phi = std::atan2(q.y(), q.x());
  const double r2 = rho * rho;
  auto D = [&](double t) {
    const double sn = std::sin(t - phi);
    const double h = z - a * t;
    return r2 * sn * sn + h * h;
  };
  auto dD = [&](double t) { return r2 * std::sin(2.0 * (t - phi)) - 2.0 * a * (z - a * t); };
  auto ddD = [&](double t) { return 2.0 * r2 * std::cos(2.0 * (t - phi)) + 2.0 * a * a; };

  // Any minimizer has |z - a t| <= rho because D(z / a) <= rho^2.
  double lo = (z - rho) / a, hi = (z + rho) / a;
  if (lo > hi) std::swap(lo, hi);
  const double step = kPi / 16.0;
  const long n = std::clamp(static_cast<long>(std::ceil((hi - lo) / step)), 2L, 200000L);
  const double h = (hi - lo) / n;

  double best_t = lo, best_d = D(lo);
  if (D(hi) < best_d) {
    best_t = hi;
    best_d = D(hi);
  }
  double t_prev = lo, g_prev = dD(lo);
  for (long k = 1; k <= n; ++k) {
    const double t_cur = lo + k * h;
    const double g_cur = dD(t_cur);
    if (g_prev < 0.0 && g_cur >= 0.0) {
      // Safeguarded Newton on the bracket [t_prev, t_cur].
      double a0 = t_prev, b0 = t_cur, t = 0.5 * (a0 + b0);
      for (int it = 0; it < 100; ++it) {
        const double g = dD(t);
        if (g < 0.0) a0 = t; else b0 = t;
        const double curv = ddD(t);
        double tn = curv > 0.0 ? t - g / curv : 0.5 * (a0 + b0);
        if (!(tn > a0 && tn < b0)) tn = 0.5 * (a0 + b0);
        if (std::abs(tn - t) <= 1e-15 * (1.0 + std::abs(t))) {
          t = tn;
          break;
        }
        t = tn;
      }
      const double dt = D(t);
      if (dt < best_d) {
        best_d = dt;
        best_t = t;
      }
    }
    t_prev = t_cur;
    g_prev = g_cur;
  }
  best.t = best_t;
  best.s = q.x() * std::cos(best_t) + q.y() * std::sin(best_t);
  best.distance = std::sqrt(std::max(0.0, best_d));
  return best;
}

std::string to_string(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::plane: return "plane";
    case SurfaceKind::helicoid: return "helicoid";
    case SurfaceKind::catenoid: return "catenoid";
  }
  return "unknown";
}

SurfaceKind surface_kind_from_string(const std::string& s) {
  if (s == "plane") return SurfaceKind::plane;
  if (s == "helicoid") return SurfaceKind::helicoid;
  if (s == "catenoid") return SurfaceKind::catenoid;
  throw Error("unknown surface kind '" + s + "'");
}

std::shared_ptr<const AnalyticGraph> analytic_graph(SurfaceKind kind, const SurfaceParams& p) {
  auto g = std::make_shared<AnalyticGraph>();
  switch (kind) {
    case SurfaceKind::plane: {
      const double tx = p.tilt.x(), ty = p.tilt.y(), h = p.height;
      g->eval = [tx, ty, h](double r, double t) {
        const double c = std::cos(t), s = std::sin(t);
        const double lin = tx * c + ty * s;
        const double rot = -tx * s + ty * c;
        return PolarJet{h + r * lin, lin, r * rot, 0.0, rot, -r * lin};
      };
      g->descriptor = {{"kind", "plane"}, {"tilt", {tx, ty}}, {"height", h}};
      break;
    }
    case SurfaceKind::helicoid: {
      if (p.pitch == 0.0) throw Error("helicoid pitch must be nonzero");
      const double a = p.pitch;
      g->eval = [a](double, double t) { return PolarJet{a * t, 0.0, a, 0.0, 0.0, 0.0}; };
      g->descriptor = {{"kind", "helicoid"}, {"pitch", a}};
      break;
    }
    case SurfaceKind::catenoid: {
      if (!(p.neck > 0.0)) throw Error("catenoid neck radius must be positive");
      const double c = p.neck;
      g->eval = [c](double r, double) {
        const double d = r * r - c * c;
        const double sq = std::sqrt(d);
        return PolarJet{c * std::acosh(r / c), c / sq, 0.0, -c * r / (d * sq), 0.0, 0.0};
      };
      g->descriptor = {{"kind", "catenoid"}, {"neck", c}};
      break;
    }
  }
  return g;
}

std::shared_ptr<const AnalyticGraph> analytic_from_descriptor(const nlohmann::json& d) {
  if (!d.is_object() || !d.contains("kind")) return nullptr;
  const std::string kind = d.at("kind").get<std::string>();
  SurfaceParams p;
  if (kind == "plane") {
    p.tilt = Vec2(d.at("tilt").at(0).get<double>(), d.at("tilt").at(1).get<double>());
    p.height = d.at("height").get<double>();
    return analytic_graph(SurfaceKind::plane, p);
  }
  if (kind == "helicoid") {
    p.pitch = d.at("pitch").get<double>();
    return analytic_graph(SurfaceKind::helicoid, p);
  }
  if (kind == "catenoid") {
    p.neck = d.at("neck").get<double>();
    return analytic_graph(SurfaceKind::catenoid, p);
  }
  return nullptr;
}

ExactSurface make_surface(SurfaceKind kind, const SurfaceParams& params, const PolarGrid& grid) {
  ExactSurface out;
  if (kind == SurfaceKind::catenoid && !(grid.rect().r1 > params.neck)) {
    if (!(params.neck > 0.0)) throw Error("catenoid neck radius must be positive");
    std::ostringstream os;
    os << "catenoid is not a graph over rho <= neck (" << params.neck
       << "); returning mesh only";
    out.warnings.push_back(os.str());
    const double r_out = std::max(grid.rect().r2, params.neck * 1.0001);
    const double z_hi = params.neck * std::acosh(r_out / params.neck);
    MeshPatch m = catenoid_mesh(params.neck, 0.0, z_hi, grid.n_rho(), grid.n_theta());
    out.mesh = transformed(m, params.rotation, params.translation);
    return out;
  }
  MultiGraph g = MultiGraph::from_analytic(grid, analytic_graph(kind, params));
  g.frame = params.rotation;
  g.center = params.translation;
  out.mesh = graph_embed(g);
  out.graph = std::move(g);
  return out;
}

MeshPatch helicoid_ball_mesh(const HelicoidModel& model, double radius, int n_s, int n_t) {
  model.validate();
  if (!(radius > 0.0) || n_s < 3 || n_t < 3) throw Error("helicoid_ball_mesh: bad sampling");
  const double a = model.pitch;
  const double t_max = radius / std::abs(a);
  MeshPatch m;
  std::vector<char> keep;
  const double lim = radius * (1.0 + 1e-12);
  for (int i = 0; i < n_s; ++i) {
    const double s = -radius + 2.0 * radius * i / (n_s - 1);
    for (int j = 0; j < n_t; ++j) {
      const double t = -t_max + 2.0 * t_max * j / (n_t - 1);
      m.vertices.push_back(model.point(s, t));
      m.normals.push_back(model.normal(s, t));
      m.A2.push_back(model.A2(s));
      m.shape.push_back(model.shape(s, t));
      keep.push_back(model.local_point(s, t).norm() <= lim);
    }
  }
  for (int i = 0; i + 1 < n_s; ++i)
    for (int j = 0; j + 1 < n_t; ++j)
      add_cell_triangles(m.triangles, i * n_t + j, (i + 1) * n_t + j, (i + 1) * n_t + j + 1,
                         i * n_t + j + 1);
  return compact(std::move(m), keep);
}

MeshPatch catenoid_mesh(double neck, double z_lo, double z_hi, int n_z, int n_phi) {
  if (!(neck > 0.0) || !(z_hi > z_lo) || n_z < 2 || n_phi < 3)
    throw Error("catenoid_mesh: bad sampling");
  MeshPatch m;
  for (int i = 0; i < n_z; ++i) {
    const double z = z_lo + (z_hi - z_lo) * i / (n_z - 1);
    const double c = std::cosh(z / neck), sh = std::sinh(z / neck);
    for (int j = 0; j < n_phi; ++j) {
      const double phi = kTwoPi * j / n_phi;
      const double cp = std::cos(phi), sp = std::sin(phi);
      m.vertices.emplace_back(neck * c * cp, neck * c * sp, z);
      const Vec3 n(-cp / c, -sp / c, sh / c);
      m.normals.push_back(n.normalized());
      m.A2.push_back(2.0 / (neck * neck * c * c * c * c));
      const Vec3 xz(sh * cp, sh * sp, 1.0);
      const Vec3 xp(-neck * c * sp, neck * c * cp, 0.0);
      const Vec3 nz(cp * sh / (neck * c * c), sp * sh / (neck * c * c), 1.0 / (neck * c * c));
      const Vec3 np(sp / c, -cp / c, 0.0);
      m.shape.push_back(shape_from_frames(xz, xp, n, nz, np));
    }
  }
  for (int i = 0; i + 1 < n_z; ++i)
    for (int j = 0; j < n_phi; ++j) {
      const int jn = (j + 1) % n_phi;
      add_cell_triangles(m.triangles, i * n_phi + j, (i + 1) * n_phi + j, (i + 1) * n_phi + jn,
                         i * n_phi + jn);
    }
  return m;
}

MeshPatch plane_mesh(double half, int n) {
  if (!(half > 0.0) || n < 2) throw Error("plane_mesh: bad sampling");
  MeshPatch m;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      m.vertices.emplace_back(-half + 2.0 * half * i / (n - 1), -half + 2.0 * half * j / (n - 1), 0.0);
      m.normals.emplace_back(0.0, 0.0, 1.0);
      m.A2.push_back(0.0);
      m.shape.push_back(Mat3::Zero());
    }
  for (int i = 0; i + 1 < n; ++i)
    for (int j = 0; j + 1 < n; ++j)
      add_cell_triangles(m.triangles, i * n + j, (i + 1) * n + j, (i + 1) * n + j + 1, i * n + j + 1);
  return m;
}

Vec2 weierstrass_point(const WeierstrassAlpha& alpha, double t) {
  const double a1 = alpha.alpha1, a2 = alpha.alpha2;
  const double inv = 1.0 / (a1 * a1 + a2 * a2);
  const double sh = std::sinh(a2 * t), ch = std::cosh(a2 * t);
  const double sn = std::sin(a1 * t), cs = std::cos(a1 * t);
  return {inv * (a2 * sh * sn - a1 * ch * cs), inv * (a2 * sh * cs + a1 * ch * sn)};
}

CurveSamples weierstrass_curve(const WeierstrassAlpha& alpha, double t0, double t1, int n) {
  if (!(alpha.norm() > 0.0)) throw Error("weierstrass_curve: alpha must be nonzero");
  if (n < 2) throw Error("weierstrass_curve: need at least 2 samples");
  if (!(t1 > t0)) throw Error("weierstrass_curve: empty parameter range");
  CurveSamples c;
  c.t.resize(n);
  c.points.resize(n);
  for (int k = 0; k < n; ++k) {
    c.t[k] = k + 1 == n ? t1 : t0 + (t1 - t0) * k / (n - 1);
    c.points[k] = weierstrass_point(alpha, c.t[k]);
  }
  return c;
}

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Distance from p to segment [a, b] and the parameter of the foot point.
std::pair<double, double> point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  double u = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
  return {(a + u * d - p).norm(), u};
}

struct SegmentGap {
  double dist;
  double u;  // parameter on the first segment
  double v;  // parameter on the second segment
};

SegmentGap segment_gap(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double o1 = cross2(p2 - p1, q1 - p1), o2 = cross2(p2 - p1, q2 - p1);
  const double o3 = cross2(q2 - q1, p1 - q1), o4 = cross2(q2 - q1, p2 - q1);
  if (((o1 < 0 && o2 > 0) || (o1 > 0 && o2 < 0)) && ((o3 < 0 && o4 > 0) || (o3 > 0 && o4 < 0)))
    return {0.0, o3 / (o3 - o4), o1 / (o1 - o2)};
  SegmentGap best{kInfinity, 0, 0};
  auto [d1, u1] = point_segment(p1, q1, q2);
  if (d1 < best.dist) best = {d1, 0.0, u1};
  auto [d2, u2] = point_segment(p2, q1, q2);
  if (d2 < best.dist) best = {d2, 1.0, u2};
  auto [d3, u3] = point_segment(q1, p1, p2);
  if (d3 < best.dist) best = {d3, u3, 0.0};
  auto [d4, u4] = point_segment(q2, p1, p2);
  if (d4 < best.dist) best = {d4, u4, 1.0};
  return best;
}

}  // namespace

EmbeddednessVerdict embeddedness_verdict(const CurveSamples& c, double tol, Exec exec) {
  if (!(tol > 0.0)) throw Error("embeddedness_verdict: tol must be positive");
  const long n = static_cast<long>(c.points.size());
  if (n < 16) throw Error("embeddedness_verdict: need at least 16 samples");
  const long segs = n - 1;

  struct RowResult {
    double min_dist = kInfinity;
    long hit = -1;
    double u = 0.0, v = 0.0;
  };
  std::vector<RowResult> rows(segs);
  for_each_index_dynamic(segs, exec, [&](long i) {
    RowResult r;
    for (long j = i + 2; j < segs; ++j) {
      const SegmentGap g = segment_gap(c.points[i], c.points[i + 1], c.points[j], c.points[j + 1]);
      if (g.dist < r.min_dist) r.min_dist = g.dist;
      if (g.dist <= tol && r.hit < 0) {
        r.hit = j;
        r.u = g.u;
        r.v = g.v;
      }
    }
    rows[i] = r;
  });

  EmbeddednessVerdict verdict;
  for (long i = 0; i < segs; ++i) {
    verdict.min_separation = std::min(verdict.min_separation, rows[i].min_dist);
    if (verdict.embedded && rows[i].hit >= 0) {
      const long j = rows[i].hit;
      verdict.embedded = false;
      verdict.t_a = c.t[i] + rows[i].u * (c.t[i + 1] - c.t[i]);
      verdict.t_b = c.t[j] + rows[i].v * (c.t[j + 1] - c.t[j]);
    }
  }
  return verdict;
}

}  // namespace hf

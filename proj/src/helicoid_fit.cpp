#include "hf/helicoid_fit.hpp"

#include "hf/io.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <exception>
#include <unordered_map>

namespace hf {

namespace {

// Uniform bucket grid over triangle bounding boxes.
class TriangleGrid {
 public:
  TriangleGrid(const MeshPatch& m, double cell) : m_(&m), cell_(cell) {
    lo_ = m.vertices.front();
    for (const Vec3& x : m.vertices) lo_ = lo_.cwiseMin(x);
    for (long t = 0; t < m.triangle_count(); ++t) {
      Vec3 a = m.vertices[m.triangles[t][0]], b = a;
      for (int k = 1; k < 3; ++k) {
        a = a.cwiseMin(m.vertices[m.triangles[t][k]]);
        b = b.cwiseMax(m.vertices[m.triangles[t][k]]);
      }
      const auto i0 = cell_of(a), i1 = cell_of(b);
      for (long x = i0[0]; x <= i1[0]; ++x)
        for (long y = i0[1]; y <= i1[1]; ++y)
          for (long z = i0[2]; z <= i1[2]; ++z) buckets_[key(x, y, z)].push_back(static_cast<int>(t));
    }
  }

  // Triangles whose buckets meet the box [a, b], sorted and unique.
  std::vector<int> query(const Vec3& a, const Vec3& b) const {
    std::vector<int> out;
    const auto i0 = cell_of(a), i1 = cell_of(b);
    for (long x = i0[0]; x <= i1[0]; ++x)
      for (long y = i0[1]; y <= i1[1]; ++y)
        for (long z = i0[2]; z <= i1[2]; ++z) {
          auto it = buckets_.find(key(x, y, z));
          if (it != buckets_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  std::array<long, 3> cell_of(const Vec3& p) const {
    std::array<long, 3> c{};
    for (int k = 0; k < 3; ++k) c[k] = static_cast<long>(std::floor((p[k] - lo_[k]) / cell_));
    return c;
  }
  static long long key(long x, long y, long z) {
    return ((static_cast<long long>(x) + (1LL << 20)) << 42) ^ ((static_cast<long long>(y) + (1LL << 20)) << 21) ^
           (static_cast<long long>(z) + (1LL << 20));
  }

  const MeshPatch* m_;
  double cell_;
  Vec3 lo_;
  std::unordered_map<long long, std::vector<int>> buckets_;
};

struct RayHit {
  double tau = 0.0;
  Vec3 point;
};

// Moller-Trumbore for the line p + tau d.
bool intersect(const MeshPatch& m, int t, const Vec3& p, const Vec3& d, RayHit& hit) {
  constexpr double tol = 1e-12;
  const Vec3& a = m.vertices[m.triangles[t][0]];
  const Vec3& b = m.vertices[m.triangles[t][1]];
  const Vec3& c = m.vertices[m.triangles[t][2]];
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 P = d.cross(e2);
  const double det = e1.dot(P);
  if (std::abs(det) <= 1e-14 * e1.norm() * e2.norm()) return false;
  const double inv = 1.0 / det;
  const Vec3 T = p - a;
  const double u = T.dot(P) * inv;
  if (u < -tol || u > 1.0 + tol) return false;
  const Vec3 Q = T.cross(e1);
  const double v = d.dot(Q) * inv;
  if (v < -tol || u + v > 1.0 + tol) return false;
  hit.tau = e2.dot(Q) * inv;
  hit.point = (1.0 - u - v) * a + u * b + v * c;
  return true;
}

double mean_edge(const MeshPatch& m) {
  double sum = 0.0;
  long n = 0;
  for (const Triangle& t : m.triangles)
    for (int k = 0; k < 3; ++k) {
      sum += (m.vertices[t[k]] - m.vertices[t[(k + 1) % 3]]).norm();
      ++n;
    }
  return n > 0 ? sum / n : 0.0;
}

// Least-squares gradient in the tangent plane from the given neighbors.
bool ls_gradient(const MeshPatch& m, const std::vector<double>& f, int v, const std::vector<int>& nb, Vec3& out) {
  const auto [e1, e2] = tangent_basis(m.normals[v]);
  Mat2 A = Mat2::Zero();
  Vec2 b = Vec2::Zero();
  for (int w : nb) {
    if (w == v) continue;
    const Vec3 dx = m.vertices[w] - m.vertices[v];
    const Vec2 q(dx.dot(e1), dx.dot(e2));
    A += q * q.transpose();
    b += q * (f[w] - f[v]);
  }
  const double tr = A.trace();
  if (!(tr > 0.0) || A.determinant() <= 1e-10 * tr * tr) return false;
  const Vec2 g = A.ldlt().solve(b);
  out = g[0] * e1 + g[1] * e2;
  return true;
}

double sup_norm_of(const std::vector<double>& nu, const std::vector<Vec3>& grad) {
  double s = 0.0;
  for (std::size_t v = 0; v < nu.size(); ++v) s = std::max(s, std::abs(nu[v]) + grad[v].norm());
  return s;
}

// Signed distances of points to a helicoid and the Jacobian of the fit
// parameters (rotation increment, translation, pitch).
struct FitEval {
  std::vector<double> d;
  Eigen::MatrixXd J;
  double cost = 0.0;
};

FitEval evaluate(const HelicoidModel& h, const std::vector<Vec3>& pts, bool with_jacobian) {
  FitEval e;
  const long n = static_cast<long>(pts.size());
  e.d.resize(n);
  if (with_jacobian) e.J.resize(n, 7);
  const Vec3 axis = h.axis();
  for (long k = 0; k < n; ++k) {
    const auto pr = h.project(pts[k]);
    const Vec3 X = h.point(pr.s, pr.t);
    const Vec3 nrm = h.normal(pr.s, pr.t);
    e.d[k] = nrm.dot(pts[k] - X);
    e.cost += e.d[k] * e.d[k];
    if (with_jacobian) {
      const Vec3 jw = -(X - h.translation).cross(nrm);
      e.J.row(k) << jw.x(), jw.y(), jw.z(), -nrm.x(), -nrm.y(), -nrm.z(), -pr.t * nrm.dot(axis);
    }
  }
  return e;
}

struct RestartResult {
  HelicoidModel model;
  double cost = kInfinity;
  int iterations = 0;
  bool converged = false;
};

RestartResult levenberg_marquardt(HelicoidModel h, const std::vector<Vec3>& pts, int max_iter, double min_pitch) {
  RestartResult r;
  FitEval cur = evaluate(h, pts, true);
  double lambda = 1e-3;
  for (int it = 0; it < max_iter; ++it) {
    r.iterations = it + 1;
    const Eigen::MatrixXd A = cur.J.transpose() * cur.J;
    const Eigen::VectorXd g = cur.J.transpose() * Eigen::Map<const Eigen::VectorXd>(cur.d.data(), cur.d.size());
    if (g.norm() <= 1e-14 * (1.0 + cur.cost)) {
      r.converged = true;
      break;
    }
    bool accepted = false;
    for (int attempt = 0; attempt < 12 && lambda < 1e14; ++attempt) {
      Eigen::MatrixXd M = A;
      for (int k = 0; k < 7; ++k) M(k, k) += lambda * std::max(A(k, k), 1e-12);
      const Eigen::VectorXd delta = M.ldlt().solve(-g);
      if (!delta.allFinite()) {
        lambda *= 4.0;
        continue;
      }
      HelicoidModel trial = h;
      trial.rotation = rotation_from_vector(delta.head<3>()) * h.rotation;
      trial.translation = h.translation + delta.segment<3>(3);
      trial.pitch = h.pitch + delta[6];
      if (std::abs(trial.pitch) < min_pitch || trial.pitch * h.pitch < 0.0) {
        lambda *= 4.0;
        continue;
      }
      FitEval next = evaluate(trial, pts, false);
      if (std::isfinite(next.cost) && next.cost < cur.cost) {
        const double drop = cur.cost - next.cost;
        h = trial;
        cur = evaluate(h, pts, true);
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (drop <= 1e-10 * cur.cost + 1e-28 || delta.norm() <= 1e-13) r.converged = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) {
      // No decrease at any damping: stationary point.
      r.converged = std::isfinite(cur.cost);
      break;
    }
    if (r.converged) break;
  }
  // Keep the rotation orthonormal after many small updates.
  Eigen::JacobiSVD<Mat3> svd(h.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  h.rotation = svd.matrixU() * svd.matrixV().transpose();
  r.model = h;
  r.cost = cur.cost;
  return r;
}

}  // namespace

std::vector<Vec3> tangential_gradient(const MeshPatch& m, const std::vector<double>& f, Exec exec) {
  if (static_cast<long>(f.size()) != m.vertex_count()) throw Error("scalar field size does not match the mesh");
  if (static_cast<long>(m.normals.size()) != m.vertex_count()) throw Error("mesh has no normals");
  const MeshTopology topo = build_topology(m);
  std::vector<Vec3> out(m.vertices.size(), Vec3::Zero());
  for_each_index(m.vertex_count(), exec, [&](long v) {
    Vec3 g;
    if (ls_gradient(m, f, static_cast<int>(v), topo.neighbors[v], g) ||
        ls_gradient(m, f, static_cast<int>(v), topo.ring(static_cast<int>(v), 2), g))
      out[v] = g;
  });
  return out;
}

NormalGraph normal_graph_from_offsets(const MeshPatch& base, std::vector<double> nu, Exec exec) {
  NormalGraph g;
  g.base = base;
  g.nu = std::move(nu);
  g.grad_nu = tangential_gradient(base, g.nu, exec);
  g.sup_norm = sup_norm_of(g.nu, g.grad_nu);
  return g;
}

NormalGraph build_normal_graph(const MeshPatch& base, const MeshPatch& target, const NormalGraphOptions& opt) {
  base.validate();
  target.validate();
  if (!(opt.search_radius > 0.0)) throw Error("search radius must be positive");
  if (base.vertices.empty() || target.triangles.empty()) throw Error("empty mesh");
  const double R = opt.search_radius;
  const TriangleGrid tg(target, std::max(R, mean_edge(target)));

  const long n = base.vertex_count();
  std::vector<double> nu(n, 0.0), resid(n, 0.0);
  std::vector<int> hits(n, 0);
  for_each_index_dynamic(n, opt.exec, [&](long v) {
    const Vec3& p = base.vertices[v];
    const Vec3& d = base.normals[v];
    const Vec3 a = p - R * d, b = p + R * d;
    std::vector<RayHit> found;
    for (int t : tg.query(a.cwiseMin(b), a.cwiseMax(b))) {
      RayHit h;
      if (intersect(target, t, p, d, h) && std::abs(h.tau) <= R) found.push_back(h);
    }
    std::sort(found.begin(), found.end(), [](const RayHit& x, const RayHit& y) { return x.tau < y.tau; });
    std::vector<RayHit> uniq;
    for (const RayHit& h : found)
      if (uniq.empty() || std::abs(h.tau - uniq.back().tau) > 1e-9) uniq.push_back(h);
    hits[v] = static_cast<int>(uniq.size());
    if (uniq.size() == 1) {
      nu[v] = uniq[0].tau;
      resid[v] = (p + nu[v] * d - uniq[0].point).norm();
    }
  });

  std::vector<long> bad;
  long missing = 0, multiple = 0;
  for (long v = 0; v < n; ++v) {
    if (hits[v] == 1) continue;
    bad.push_back(v);
    if (hits[v] == 0) ++missing; else ++multiple;
  }
  if (!bad.empty())
    throw Error("target is not a normal graph over the base: " + std::to_string(missing) + " vertices without a hit, " +
                    std::to_string(multiple) + " with several hits",
                bad);

  NormalGraph g = normal_graph_from_offsets(base, std::move(nu), opt.exec);
  g.search_radius = R;
  for (double r : resid) g.reconstruction_residual = std::max(g.reconstruction_residual, r);
  return g;
}

std::vector<Vec3> apply_phi(const NormalGraph& g) {
  std::vector<Vec3> out(g.base.vertices.size());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = g.base.vertices[v] + g.nu[v] * g.base.normals[v];
  return out;
}

DistortionReport phi_distortion(const NormalGraph& g, Exec exec) {
  const MeshPatch& m = g.base;
  const long n = m.vertex_count();
  if (static_cast<long>(m.A2.size()) != n) throw Error("base mesh carries no |A| data");
  if (static_cast<long>(g.nu.size()) != n || static_cast<long>(g.grad_nu.size()) != n)
    throw Error("normal graph size does not match the base");
  std::vector<Mat3> fitted;
  const std::vector<Mat3>* shape = &m.shape;
  if (static_cast<long>(m.shape.size()) != n) {
    fitted = quadric_curvature(m, exec).shape;
    shape = &fitted;
  }

  DistortionReport r;
  r.sigma_min.resize(n);
  r.sigma_max.resize(n);
  for_each_index(n, exec, [&](long v) {
    const Vec3& nrm = m.normals[v];
    const auto [e1, e2] = tangent_basis(nrm);
    // d phi (e_i) = e_i + D_i with D_i = <grad nu, e_i> n + nu Dn(e_i). The
    // Gram matrix is I + E because (e1, e2, n) is orthonormal.
    const Vec3 D1 = g.grad_nu[v].dot(e1) * nrm + g.nu[v] * ((*shape)[v] * e1);
    const Vec3 D2 = g.grad_nu[v].dot(e2) * nrm + g.nu[v] * ((*shape)[v] * e2);
    const double E11 = 2.0 * e1.dot(D1) + D1.dot(D1);
    const double E22 = 2.0 * e2.dot(D2) + D2.dot(D2);
    const double E12 = e1.dot(D2) + e2.dot(D1) + D1.dot(D2);
    const double mid = 0.5 * (E11 + E22);
    const double rad = std::hypot(0.5 * (E11 - E22), E12);
    r.sigma_min[v] = std::sqrt(std::max(0.0, 1.0 + mid - rad));
    r.sigma_max[v] = std::sqrt(std::max(0.0, 1.0 + mid + rad));
  });
  if (n > 0) {
    r.lip_lo = *std::min_element(r.sigma_min.begin(), r.sigma_min.end());
    r.lip_hi = *std::max_element(r.sigma_max.begin(), r.sigma_max.end());
  }
  double amax = 0.0;
  for (double a2 : m.A2) amax = std::max(amax, std::sqrt(std::max(0.0, a2)));
  r.rescale = std::max(1.0, amax);
  r.sup_norm = g.sup_norm;
  return r;
}

HelicoidFit fit_helicoid(const MeshPatch& patch, const FitOptions& opt) {
  const long n = patch.vertex_count();
  if (n < 100) throw Error("helicoid fit needs at least 100 vertices, got " + std::to_string(n));
  MeshPatch m = patch;
  if (static_cast<long>(m.normals.size()) != n) m.normals = area_weighted_normals(m);
  m.validate();
  if (static_cast<long>(m.A2.size()) != n) m.A2 = second_fundamental(m, opt.exec);
  const double a2max = *std::max_element(m.A2.begin(), m.A2.end());
  if (!(a2max > 1e-6)) throw Error("patch is flat: max |A|^2 <= 1e-6");
  const double diam = patch_scale(m);

  // Axis direction: |A|^2 varies along the rulings, which are orthogonal to it.
  const std::vector<Vec3> ga = tangential_gradient(m, m.A2, opt.exec);
  double gmax = 0.0;
  for (const Vec3& g : ga) gmax = std::max(gmax, g.norm());
  if (!(gmax > 0.0)) throw Error("|A|^2 is constant on the patch; no ruling direction");
  Mat3 M = Mat3::Zero();
  long ref = 0;
  for (long v = 0; v < n; ++v) {
    const double w = ga[v].norm();
    if (w <= 1e-3 * gmax) continue;
    const Vec3 r = ga[v] / w;
    M += w * r * r.transpose();
    if (w > ga[ref].norm()) ref = v;
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(M);
  const Vec3 axis = es.eigenvectors().col(0).normalized();
  const auto [b1, b2] = tangent_basis(axis);

  // Axis point: least-squares meeting point of the projected ruling lines,
  // falling back to the |A|^2-weighted centroid.
  Mat2 L = Mat2::Zero();
  Vec2 rhs = Vec2::Zero();
  Vec3 centroid = Vec3::Zero();
  double wsum = 0.0;
  for (long v = 0; v < n; ++v) {
    centroid += m.A2[v] * m.vertices[v];
    wsum += m.A2[v];
    const double w = ga[v].norm();
    if (w <= 1e-3 * gmax) continue;
    Vec2 d(ga[v].dot(b1), ga[v].dot(b2));
    if (d.norm() <= 1e-12) continue;
    d.normalize();
    const Vec2 P(m.vertices[v].dot(b1), m.vertices[v].dot(b2));
    const Mat2 proj = Mat2::Identity() - d * d.transpose();
    L += w * proj;
    rhs += w * proj * P;
  }
  centroid /= wsum;
  Vec3 axis_point;
  if (L.determinant() > 1e-10 * L.trace() * L.trace()) {
    const Vec2 c = L.ldlt().solve(rhs);
    axis_point = c[0] * b1 + c[1] * b2 + centroid.dot(axis) * axis;
  } else {
    axis_point = centroid;
  }

  // |a| from |A|^2 = 2 a^2 / (a^2 + rho^2)^2 against distance to the axis.
  std::vector<double> rho(n);
  for (long v = 0; v < n; ++v) {
    const Vec3 q = m.vertices[v] - axis_point;
    rho[v] = (q - q.dot(axis) * axis).norm();
  }
  auto pitch_cost = [&](double a) {
    double c = 0.0;
    for (long v = 0; v < n; ++v) {
      const double d = a * a + rho[v] * rho[v];
      const double e = 2.0 * a * a / (d * d) - m.A2[v];
      c += e * e;
    }
    return c;
  };
  const double a_lo = 1e-3 * diam, a_hi = diam;
  double best_a = a_lo, best_c = kInfinity;
  for (int k = 0; k <= 200; ++k) {
    const double a = a_lo * std::pow(a_hi / a_lo, k / 200.0);
    const double c = pitch_cost(a);
    if (c < best_c) {
      best_c = c;
      best_a = a;
    }
  }
  {
    double lo = best_a / std::pow(a_hi / a_lo, 1.0 / 200.0), hi = best_a * std::pow(a_hi / a_lo, 1.0 / 200.0);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 60; ++it) {
      const double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
      if (pitch_cost(x1) < pitch_cost(x2)) hi = x2; else lo = x1;
    }
    best_a = 0.5 * (lo + hi);
  }

  // Reference ruling through the vertex of steepest |A|^2 sits at t = 0.
  Vec3 e1 = ga[ref] - ga[ref].dot(axis) * axis;
  e1.normalize();
  const Vec3 T0 = axis_point + axis.dot(m.vertices[ref] - axis_point) * axis;

  std::vector<Vec3> pts;
  const long stride = std::max(1L, (n + opt.max_points - 1) / std::max(1, opt.max_points));
  for (long v = 0; v < n; v += stride) pts.push_back(m.vertices[v]);

  constexpr int kRestarts = 8;
  constexpr int kScreenIterations = 15;
  std::vector<RestartResult> runs(kRestarts);
  std::vector<std::exception_ptr> errs(kRestarts);
  for_each_index_dynamic(kRestarts, opt.exec, [&](long k) {
    try {
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      const double phase = (k / 2) * kPi / 4.0;
      const Vec3 f1 = std::cos(phase) * e1 + std::sin(phase) * axis.cross(e1);
      HelicoidModel h;
      h.pitch = sign * best_a;
      h.rotation.col(0) = f1;
      h.rotation.col(1) = axis.cross(f1);
      h.rotation.col(2) = axis;
      h.translation = T0;
      runs[k] = levenberg_marquardt(h, pts, std::min(kScreenIterations, opt.max_iterations), 1e-6 * diam);
    } catch (...) {
      errs[k] = std::current_exception();
    }
  });
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);

  // The two best screened restarts continue to the full iteration budget.
  std::vector<int> order(kRestarts);
  for (int k = 0; k < kRestarts; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return runs[a].cost < runs[b].cost; });
  for_each_index_dynamic(2, opt.exec, [&](long q) {
    const int k = order[q];
    if (runs[k].converged || runs[k].iterations < kScreenIterations) return;
    try {
      const int used = runs[k].iterations;
      RestartResult more = levenberg_marquardt(runs[k].model, pts, opt.max_iterations - used, 1e-6 * diam);
      more.iterations += used;
      runs[k] = more;
    } catch (...) {
      errs[k] = std::current_exception();
    }
  });
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);

  HelicoidFit fit;
  fit.restarts = kRestarts;
  for (int k = 0; k < kRestarts; ++k) {
    if (!runs[k].converged || !std::isfinite(runs[k].cost)) continue;
    ++fit.converged_restarts;
    if (fit.best_restart < 0 || runs[k].cost < runs[fit.best_restart].cost) fit.best_restart = k;
  }
  if (fit.best_restart < 0) {
    const RestartResult& b = runs[order[0]];
    throw Error("helicoid fit stagnated: no restart converged (best iterate: pitch " + format_double(b.model.pitch) +
                ", rms distance " + format_double(std::sqrt(b.cost / static_cast<double>(pts.size()))) + ")");
  }
  fit.model = runs[fit.best_restart].model;
  fit.iterations = runs[fit.best_restart].iterations;
  fit.diameter = diam;

  std::vector<double> dist(n);
  for_each_index_dynamic(n, opt.exec, [&](long v) { dist[v] = fit.model.project(m.vertices[v]).distance; });
  double ss = 0.0;
  for (double d : dist) {
    ss += d * d;
    fit.max_distance = std::max(fit.max_distance, d);
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

double helicoid_distance(const HelicoidModel& a, const HelicoidModel& b, double radius) {
  a.validate();
  b.validate();
  if (!(radius > 0.0)) throw Error("radius must be positive");
  auto one_way = [radius](const HelicoidModel& x, const HelicoidModel& y) {
    double worst = 0.0;
    const double tmax = radius / std::abs(x.pitch);
    for (int i = 0; i <= 40; ++i) {
      const double s = -radius + 2.0 * radius * i / 40.0;
      for (int j = 0; j <= 80; ++j) {
        const double t = -tmax + 2.0 * tmax * j / 80.0;
        if (x.local_point(s, t).norm() > radius) continue;
        worst = std::max(worst, y.project(x.point(s, t)).distance);
      }
    }
    return worst;
  };
  return std::max(one_way(a, b), one_way(b, a));
}

MeshPatch project_onto_model(const MeshPatch& patch, const HelicoidModel& model, Exec exec) {
  model.validate();
  const long n = patch.vertex_count();
  MeshPatch base;
  base.triangles = patch.triangles;
  base.vertices.resize(n);
  base.normals.resize(n);
  base.A2.resize(n);
  base.shape.resize(n);
  for_each_index_dynamic(n, exec, [&](long v) {
    const auto pr = model.project(patch.vertices[v]);
    base.vertices[v] = model.point(pr.s, pr.t);
    base.normals[v] = model.normal(pr.s, pr.t);
    base.A2[v] = model.A2(pr.s);
    base.shape[v] = model.shape(pr.s, pr.t);
  });
  return base;
}

DistortionReport bilipschitz_estimate(const MeshPatch& patch, const HelicoidModel& model, const NormalGraphOptions& opt) {
  const MeshPatch base = project_onto_model(patch, model, opt.exec);
  const NormalGraph g = build_normal_graph(base, patch, opt);
  DistortionReport r = phi_distortion(g, opt.exec);
  r.model = model;
  double ss = 0.0;
  for (double v : g.nu) ss += v * v;
  r.fit_residual = g.nu.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(g.nu.size()));
  return r;
}

}  // namespace hf

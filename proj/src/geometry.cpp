#include "hf/geometry.hpp"

#include <Eigen/Dense>

#include <sstream>

namespace hf {

namespace {

// Second-order first derivative of samples f[k0 + i*stride], i in [0, n).
inline double d1(const double* f, long stride, int n, int k, double h) {
  if (k == 0) return (-3.0 * f[0] + 4.0 * f[stride] - f[2 * stride]) / (2.0 * h);
  if (k == n - 1)
    return (3.0 * f[k * stride] - 4.0 * f[(k - 1) * stride] + f[(k - 2) * stride]) / (2.0 * h);
  return (f[(k + 1) * stride] - f[(k - 1) * stride]) / (2.0 * h);
}

// Second-order second derivative; the one-sided form uses four points.
inline double d2(const double* f, long stride, int n, int k, double h) {
  const double h2 = h * h;
  if (k == 0) return (2.0 * f[0] - 5.0 * f[stride] + 4.0 * f[2 * stride] - f[3 * stride]) / h2;
  if (k == n - 1)
    return (2.0 * f[k * stride] - 5.0 * f[(k - 1) * stride] + 4.0 * f[(k - 2) * stride] -
            f[(k - 3) * stride]) /
           h2;
  return (f[(k + 1) * stride] - 2.0 * f[k * stride] + f[(k - 1) * stride]) / h2;
}

// Cubic Lagrange interpolation along theta at fractional column x of row i.
double interp_theta(const MultiGraph& u, int i, double x) {
  const int n = u.grid.n_theta();
  int j = static_cast<int>(std::floor(x)) - 1;
  j = std::clamp(j, 0, n - 4);
  const double t = x - j;
  double sum = 0.0;
  for (int a = 0; a < 4; ++a) {
    double w = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a) w *= (t - b) / static_cast<double>(a - b);
    sum += w * u.at(i, j + a);
  }
  return sum;
}

}  // namespace

Vec2 cartesian_gradient(const PolarJet& j, double rho, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double p = j.u_r, q = j.u_t / rho;
  return {c * p - s * q, s * p + c * q};
}

Mat2 cartesian_hessian(const PolarJet& j, double rho, double theta) {
  // Components in the orthonormal polar frame (e_rho, e_theta).
  const double hrr = j.u_rr;
  const double hrt = j.u_rt / rho - j.u_t / (rho * rho);
  const double htt = j.u_tt / (rho * rho) + j.u_r / rho;
  Mat2 hp;
  hp << hrr, hrt, hrt, htt;
  Mat2 R;
  const double c = std::cos(theta), s = std::sin(theta);
  R << c, -s, s, c;
  return R * hp * R.transpose();
}

Derivatives derivatives(const MultiGraph& u, DerivativeSource src, Exec exec) {
  const PolarGrid& g = u.grid;
  const long n = g.size();
  Derivatives d;
  d.polar.resize(n);
  d.grad.resize(n);
  d.hess.resize(n);

  const bool use_analytic =
      src == DerivativeSource::analytic || (src == DerivativeSource::automatic && u.analytic);
  if (use_analytic && !u.analytic) throw Error("derivatives: no analytic data attached");
  d.analytic = use_analytic;

  if (use_analytic) {
    for_each_index(n, exec, [&](long k) {
      const double r = g.rho(g.radial_index(k)), t = g.theta(g.angular_index(k));
      d.polar[k] = u.analytic->eval(r, t);
    });
  } else {
    const int nr = g.n_rho(), nt = g.n_theta();
    if (nr < 4 || nt < 4) {
      std::ostringstream os;
      os << "derivatives: grid " << nr << "x" << nt
         << " too coarse for the stencil; need at least 4 nodes along each axis";
      throw Error(os.str());
    }
    std::vector<double> us(n), uss(n);
    const double* f = u.values.data();
    // Radial lines: column j, stride n_theta.
    for_each_index(nt, exec, [&](long j) {
      for (int i = 0; i < nr; ++i) {
        us[g.index(i, j)] = d1(f + j, nt, nr, i, g.h_s());
        uss[g.index(i, j)] = d2(f + j, nt, nr, i, g.h_s());
      }
    });
    for_each_index(nr, exec, [&](long i) {
      const double* row = f + g.index(static_cast<int>(i), 0);
      const double* srow = us.data() + g.index(static_cast<int>(i), 0);
      const double r = g.rho(static_cast<int>(i));
      const double rs = g.drho_ds(r), rss = g.d2rho_ds2(r);
      for (int j = 0; j < nt; ++j) {
        const long k = g.index(static_cast<int>(i), j);
        PolarJet& jet = d.polar[k];
        jet.u = f[k];
        jet.u_t = d1(row, 1, nt, j, g.h_theta());
        jet.u_tt = d2(row, 1, nt, j, g.h_theta());
        const double ust = d1(srow, 1, nt, j, g.h_theta());
        jet.u_r = us[k] / rs;
        jet.u_rr = (uss[k] - us[k] * rss / rs) / (rs * rs);
        jet.u_rt = ust / rs;
      }
    });
  }

  for_each_index(n, exec, [&](long k) {
    const double r = g.rho(g.radial_index(k)), t = g.theta(g.angular_index(k));
    d.grad[k] = cartesian_gradient(d.polar[k], r, t);
    d.hess[k] = cartesian_hessian(d.polar[k], r, t);
  });
  return d;
}

Separation separation(const MultiGraph& u, double zero_tol) {
  Separation sep;
  const PolarGrid& g = u.grid;
  const double span = g.rect().theta2 - g.rect().theta1;
  if (span < kTwoPi) return sep;

  int count = 0;
  const auto shift = g.turn_shift();
  if (shift) {
    count = g.n_theta() - *shift;
  } else {
    count = static_cast<int>(std::floor((span - kTwoPi) / g.h_theta() + 1e-9)) + 1;
  }
  if (count < 1) return sep;

  sep.empty = false;
  sep.column_shift = shift ? *shift : 0;
  sep.grid = g.angular_window(0, count);
  sep.w.resize(static_cast<long>(g.n_rho()) * count);
  for (int i = 0; i < g.n_rho(); ++i)
    for (int j = 0; j < count; ++j) {
      const double ahead =
          shift ? u.at(i, j + *shift) : interp_theta(u, i, j + kTwoPi / g.h_theta());
      sep.w[static_cast<long>(i) * count + j] = ahead - u.at(i, j);
    }

  bool pos = true, neg = true;
  for (long k = 0; k < static_cast<long>(sep.w.size()); ++k) {
    const double w = sep.w[k];
    if (std::abs(w) <= zero_tol) sep.zero_nodes.push_back(k);
    if (!(w > zero_tol)) pos = false;
    if (!(w < -zero_tol)) neg = false;
  }
  sep.sign = pos ? 1 : (neg ? -1 : 0);
  return sep;
}

MultiGraph separation_graph(const MultiGraph& u) {
  Separation sep = separation(u);
  if (sep.empty) throw Error("separation_graph: angular span shorter than one turn");
  MultiGraph w(*sep.grid, std::move(sep.w));
  if (u.analytic) {
    auto base = u.analytic;
    auto a = std::make_shared<AnalyticGraph>();
    a->eval = [base](double r, double t) { return base->eval(r, t + kTwoPi) - base->eval(r, t); };
    a->descriptor = nlohmann::json{{"kind", "separation"}};
    w.analytic = std::move(a);
  }
  return w;
}

std::vector<Triangle> grid_triangles(const PolarGrid& grid) {
  std::vector<Triangle> tris;
  tris.reserve(2L * (grid.n_rho() - 1) * (grid.n_theta() - 1));
  for (int i = 0; i + 1 < grid.n_rho(); ++i)
    for (int j = 0; j + 1 < grid.n_theta(); ++j) {
      const int v00 = static_cast<int>(grid.index(i, j));
      const int v10 = static_cast<int>(grid.index(i + 1, j));
      const int v11 = static_cast<int>(grid.index(i + 1, j + 1));
      const int v01 = static_cast<int>(grid.index(i, j + 1));
      tris.push_back({v00, v10, v11});
      tris.push_back({v00, v11, v01});
    }
  return tris;
}

GraphPointGeometry graph_point_geometry(const PolarJet& j, double rho, double theta) {
  return graph_geometry(cartesian_gradient(j, rho, theta), cartesian_hessian(j, rho, theta));
}

GraphPointGeometry graph_geometry(const Vec2& p, const Mat2& H) {
  const double W = std::sqrt(1.0 + p.squaredNorm());
  GraphPointGeometry out;
  out.normal = Vec3(-p.x(), -p.y(), 1.0) / W;

  Mat3 T;
  T.col(0) = Vec3(1.0, 0.0, p.x());
  T.col(1) = Vec3(0.0, 1.0, p.y());
  T.col(2) = out.normal;
  Mat3 dN = Mat3::Zero();
  for (int k = 0; k < 2; ++k) {
    const Vec2 He = H.col(k);
    const double dW = p.dot(He) / W;
    dN.col(k) = Vec3(-He.x(), -He.y(), 0.0) / W - out.normal * (dW / W);
  }
  Mat3 M = dN * T.inverse();
  M = 0.5 * (M + M.transpose());
  out.shape = M;
  out.A2 = M.squaredNorm();
  return out;
}

MeshPatch graph_embed(const MultiGraph& u, Exec exec) {
  u.validate();
  const PolarGrid& g = u.grid;
  MeshPatch m;
  const long n = g.size();
  m.vertices.resize(n);
  for_each_index(n, exec, [&](long k) { m.vertices[k] = u.world_point(k); });
  m.triangles = grid_triangles(g);

  m.normals.resize(n);
  m.A2.resize(n);
  m.shape.resize(n);
  const Derivatives d = derivatives(u, DerivativeSource::automatic, exec);
  for_each_index(n, exec, [&](long k) {
    const double r = g.rho(g.radial_index(k)), t = g.theta(g.angular_index(k));
    const GraphPointGeometry geo = graph_point_geometry(d.polar[k], r, t);
    m.normals[k] = (u.frame * geo.normal).normalized();
    m.A2[k] = geo.A2;
    m.shape[k] = u.frame * geo.shape * u.frame.transpose();
  });
  return m;
}

std::vector<double> second_fundamental(const MultiGraph& u, Exec exec) {
  const PolarGrid& g = u.grid;
  const Derivatives d = derivatives(u, DerivativeSource::automatic, exec);
  std::vector<double> a2(g.size());
  for_each_index(g.size(), exec, [&](long k) {
    const double r = g.rho(g.radial_index(k)), t = g.theta(g.angular_index(k));
    a2[k] = graph_point_geometry(d.polar[k], r, t).A2;
  });
  return a2;
}

namespace {

void check_degenerate(const MeshPatch& m) {
  const double scale = patch_scale(m);
  const double thr = 1e-14 * scale * scale;
  std::vector<long> bad;
  for (long t = 0; t < m.triangle_count(); ++t)
    if (triangle_area(m, t) < thr) bad.push_back(t);
  if (!bad.empty()) {
    std::ostringstream os;
    os << "degenerate triangle(s): " << bad.size() << " with area below 1e-14*scale^2, first "
       << bad.front();
    throw Error(os.str(), bad);
  }
}

// Least-squares fit z = a x^2 + b xy + c y^2 + d x + e y in the frame (t1, t2, n)
// centered at p. Returns false when the neighborhood is rank deficient.
bool fit_quadric(const MeshPatch& m, const std::vector<int>& nb, int v, const Vec3& n,
                 Eigen::Matrix<double, 5, 1>& coef, Vec3& t1, Vec3& t2) {
  std::tie(t1, t2) = tangent_basis(n);
  const Vec3& p = m.vertices[v];
  Eigen::MatrixXd A(static_cast<long>(nb.size()), 5);
  Eigen::VectorXd b(static_cast<long>(nb.size()));
  long r = 0;
  for (int q : nb) {
    if (q == v) continue;
    const Vec3 d = m.vertices[q] - p;
    const double x = d.dot(t1), y = d.dot(t2), z = d.dot(n);
    A.row(r) << x * x, x * y, y * y, x, y;
    b(r) = z;
    ++r;
  }
  if (r < 5) return false;
  A.conservativeResize(r, 5);
  b.conservativeResize(r);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < 5) return false;
  coef = qr.solve(b);
  return true;
}

}  // namespace

CurvatureFit quadric_curvature(const MeshPatch& m, Exec exec) {
  m.validate();
  check_degenerate(m);
  const MeshTopology topo = build_topology(m);
  const std::vector<Vec3> base_normals = m.normals.empty() ? area_weighted_normals(m) : m.normals;
  const long nv = m.vertex_count();

  CurvatureFit fit;
  fit.A2.assign(nv, 0.0);
  fit.shape.assign(nv, Mat3::Zero());
  fit.fitted_normals = base_normals;

  for_each_index(nv, exec, [&](long vl) {
    const int v = static_cast<int>(vl);
    std::vector<int> nb = topo.ring(v, 2);
    if (nb.size() < 8) nb = topo.ring(v, 3);
    Vec3 n = base_normals[v];
    Eigen::Matrix<double, 5, 1> c;
    Vec3 t1, t2;
    if (!fit_quadric(m, nb, v, n, c, t1, t2)) return;
    // One refinement pass in the frame of the fitted tangent plane.
    const Vec3 refined = (n - c(3) * t1 - c(4) * t2).normalized();
    if (!fit_quadric(m, nb, v, refined, c, t1, t2)) return;
    n = refined;

    Mat2 H;
    H << 2.0 * c(0), c(1), c(1), 2.0 * c(2);
    const GraphPointGeometry geo = graph_geometry(Vec2(c(3), c(4)), H);
    Mat3 F;
    F.col(0) = t1;
    F.col(1) = t2;
    F.col(2) = n;
    fit.shape[v] = F * geo.shape * F.transpose();
    fit.fitted_normals[v] = (F * geo.normal).normalized();
    fit.A2[v] = geo.A2;
  });
  return fit;
}

std::vector<double> second_fundamental(const MeshPatch& m, Exec exec) {
  return quadric_curvature(m, exec).A2;
}

void attach_curvature(MeshPatch& m, Exec exec) {
  if (m.normals.empty()) m.normals = area_weighted_normals(m);
  CurvatureFit fit = quadric_curvature(m, exec);
  m.A2 = std::move(fit.A2);
  m.shape = std::move(fit.shape);
}

bool cone_membership(const Vec3& p, const Cone& cone) {
  const Vec3 d = p - cone.vertex;
  return d.z() * d.z() <= cone.delta * cone.delta * (d.x() * d.x() + d.y() * d.y());
}

}  // namespace hf

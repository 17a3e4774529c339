#include "hf/mse_solver.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <sstream>

namespace hf {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Static P1 data of the triangulated polar grid.
struct FemMesh {
  const PolarGrid* grid = nullptr;
  std::vector<Triangle> tris;
  std::vector<double> area;
  std::vector<std::array<Vec2, 3>> grad_phi;
  std::vector<std::vector<int>> node_tris;  // incident triangles per node, ascending
  std::vector<double> lumped_mass;
  std::vector<long> unknown;                // node -> unknown index or -1
  std::vector<long> nodes_of_unknown;
};

bool on_boundary(const PolarGrid& g, long k) {
  const int i = g.radial_index(k), j = g.angular_index(k);
  return i == 0 || i == g.n_rho() - 1 || j == 0 || j == g.n_theta() - 1;
}

FemMesh build_fem(const PolarGrid& g, Exec exec) {
  FemMesh fm;
  fm.grid = &g;
  fm.tris = grid_triangles(g);
  const long nt = static_cast<long>(fm.tris.size());
  fm.area.resize(nt);
  fm.grad_phi.resize(nt);
  auto pos = [&](int k) {
    const double r = g.rho(g.radial_index(k)), t = g.theta(g.angular_index(k));
    return Vec2(r * std::cos(t), r * std::sin(t));
  };
  for_each_index(nt, exec, [&](long t) {
    const auto& tri = fm.tris[t];
    const Vec2 p0 = pos(tri[0]), p1 = pos(tri[1]), p2 = pos(tri[2]);
    Mat2 J;
    J.col(0) = p1 - p0;
    J.col(1) = p2 - p0;
    const double det = J.determinant();
    fm.area[t] = 0.5 * std::abs(det);
    if (!(fm.area[t] > 0.0)) return;
    const Mat2 Jinv = J.inverse();
    const Vec2 g1 = Jinv.row(0).transpose(), g2 = Jinv.row(1).transpose();
    fm.grad_phi[t] = {-(g1 + g2), g1, g2};
  });
  for (long t = 0; t < nt; ++t)
    if (!(fm.area[t] > 0.0)) throw Error("solver: degenerate grid triangle", {t});
  const long n = g.size();
  fm.node_tris.assign(n, {});
  for (long t = 0; t < nt; ++t)
    for (int c : fm.tris[t]) fm.node_tris[c].push_back(static_cast<int>(t));
  fm.lumped_mass.assign(n, 0.0);
  for (long k = 0; k < n; ++k)
    for (int t : fm.node_tris[k]) fm.lumped_mass[k] += fm.area[t] / 3.0;
  fm.unknown.assign(n, -1);
  for (long k = 0; k < n; ++k)
    if (!on_boundary(g, k)) {
      fm.unknown[k] = static_cast<long>(fm.nodes_of_unknown.size());
      fm.nodes_of_unknown.push_back(k);
    }
  return fm;
}

struct TriState {
  Vec2 grad_u;
  double W;
};

std::vector<TriState> tri_states(const FemMesh& fm, const std::vector<double>& u, Exec exec) {
  std::vector<TriState> st(fm.tris.size());
  for_each_index(static_cast<long>(fm.tris.size()), exec, [&](long t) {
    const auto& tri = fm.tris[t];
    Vec2 gu = Vec2::Zero();
    for (int c = 0; c < 3; ++c) gu += u[tri[c]] * fm.grad_phi[t][c];
    st[t] = {gu, std::sqrt(1.0 + gu.squaredNorm())};
  });
  return st;
}

int local_slot(const Triangle& tri, long k) {
  for (int c = 0; c < 3; ++c)
    if (tri[c] == k) return c;
  return -1;
}

// Mass-normalized gradient of the discrete area at every node (0 on boundary).
std::vector<double> normalized_residual(const FemMesh& fm, const std::vector<TriState>& st, Exec exec) {
  const long n = static_cast<long>(fm.unknown.size());
  std::vector<double> r(n, 0.0);
  for_each_index(n, exec, [&](long k) {
    if (fm.unknown[k] < 0) return;
    double acc = 0.0;
    for (int t : fm.node_tris[k]) {
      const int c = local_slot(fm.tris[t], k);
      acc += fm.area[t] * st[t].grad_u.dot(fm.grad_phi[t][c]) / st[t].W;
    }
    r[k] = acc / fm.lumped_mass[k];
  });
  return r;
}

double sup_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

double l2_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Hessian of the discrete area restricted to the unknowns. With all
// gradients zero this is the P1 Laplace stiffness matrix.
SpMat hessian(const FemMesh& fm, const std::vector<TriState>& st, Exec exec) {
  const long m = static_cast<long>(fm.nodes_of_unknown.size());
  std::vector<std::vector<Eigen::Triplet<double>>> rows(m);
  for_each_index(m, exec, [&](long row) {
    const long k = fm.nodes_of_unknown[row];
    auto& out = rows[row];
    for (int t : fm.node_tris[k]) {
      const auto& tri = fm.tris[t];
      const int a = local_slot(tri, k);
      const Vec2& ga = fm.grad_phi[t][a];
      const TriState& s = st[t];
      const double W3 = s.W * s.W * s.W;
      const double ua = s.grad_u.dot(ga);
      for (int b = 0; b < 3; ++b) {
        const long col = fm.unknown[tri[b]];
        if (col < 0) continue;
        const Vec2& gb = fm.grad_phi[t][b];
        const double v = fm.area[t] * (ga.dot(gb) / s.W - ua * s.grad_u.dot(gb) / W3);
        out.emplace_back(static_cast<int>(row), static_cast<int>(col), v);
      }
    }
  });
  std::vector<Eigen::Triplet<double>> all;
  for (auto& r : rows) all.insert(all.end(), r.begin(), r.end());
  SpMat H(m, m);
  H.setFromTriplets(all.begin(), all.end());
  return H;
}

// Unnormalized gradient on the unknowns (the Newton right-hand side).
Eigen::VectorXd raw_gradient(const FemMesh& fm, const std::vector<double>& normalized) {
  const long m = static_cast<long>(fm.nodes_of_unknown.size());
  Eigen::VectorXd g(m);
  for (long row = 0; row < m; ++row) {
    const long k = fm.nodes_of_unknown[row];
    g[row] = normalized[k] * fm.lumped_mass[k];
  }
  return g;
}

Eigen::VectorXd linear_solve(const SpMat& H, const Eigen::VectorXd& rhs) {
  Eigen::SimplicialLDLT<SpMat> ldlt(H);
  if (ldlt.info() == Eigen::Success) {
    Eigen::VectorXd x = ldlt.solve(rhs);
    if (ldlt.info() == Eigen::Success && x.allFinite()) return x;
  }
  Eigen::SparseLU<SpMat> lu;
  lu.analyzePattern(H);
  lu.factorize(H);
  if (lu.info() != Eigen::Success) throw Error("solver: Newton system is singular");
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw Error("solver: Newton solve failed");
  return x;
}

void apply_boundary(const PolarGrid& g, const DirichletData& b, std::vector<double>& u) {
  const int nr = g.n_rho(), nt = g.n_theta();
  for (int j = 0; j < nt; ++j) {
    u[g.index(0, j)] = b.rho_min[j];
    u[g.index(nr - 1, j)] = b.rho_max[j];
  }
  for (int i = 0; i < nr; ++i) {
    u[g.index(i, 0)] = b.theta_min[i];
    u[g.index(i, nt - 1)] = b.theta_max[i];
  }
}

std::vector<double> harmonic_extension(const FemMesh& fm, const DirichletData& b, Exec exec) {
  const PolarGrid& g = *fm.grid;
  std::vector<double> u(g.size(), 0.0);
  apply_boundary(g, b, u);
  if (fm.nodes_of_unknown.empty()) return u;
  std::vector<TriState> flat(fm.tris.size(), TriState{Vec2::Zero(), 1.0});
  const SpMat K = hessian(fm, flat, exec);
  // Right-hand side: -K_ib u_b, from the gradient of the Dirichlet energy at
  // u = boundary data with zero interior.
  const long m = static_cast<long>(fm.nodes_of_unknown.size());
  Eigen::VectorXd rhs(m);
  for (long row = 0; row < m; ++row) {
    const long k = fm.nodes_of_unknown[row];
    double acc = 0.0;
    for (int t : fm.node_tris[k]) {
      const auto& tri = fm.tris[t];
      const int a = local_slot(tri, k);
      for (int c = 0; c < 3; ++c)
        if (fm.unknown[tri[c]] < 0)
          acc += fm.area[t] * fm.grad_phi[t][a].dot(fm.grad_phi[t][c]) * u[tri[c]];
    }
    rhs[row] = -acc;
  }
  const Eigen::VectorXd x = linear_solve(K, rhs);
  for (long row = 0; row < m; ++row) u[fm.nodes_of_unknown[row]] = x[row];
  return u;
}

bool max_principle_holds(const PolarGrid& g, const std::vector<double>& u) {
  double bmax = -kInfinity, bmin = kInfinity, imax = -kInfinity, imin = kInfinity;
  for (long k = 0; k < g.size(); ++k) {
    if (on_boundary(g, k)) {
      bmax = std::max(bmax, u[k]);
      bmin = std::min(bmin, u[k]);
    } else {
      imax = std::max(imax, u[k]);
      imin = std::min(imin, u[k]);
    }
  }
  if (imax == -kInfinity) return true;
  const double tol = 1e-9 * (1.0 + std::abs(bmax) + std::abs(bmin));
  return imax <= bmax + tol && imin >= bmin - tol;
}

}  // namespace

std::vector<double> mse_residual(const MultiGraph& u, DerivativeSource src, Exec exec) {
  const Derivatives d = derivatives(u, src, exec);
  std::vector<double> r(u.grid.size());
  for_each_index(u.grid.size(), exec, [&](long k) {
    const Vec2& p = d.grad[k];
    const Mat2& H = d.hess[k];
    const double W2 = 1.0 + p.squaredNorm();
    const double F = (1.0 + p.y() * p.y()) * H(0, 0) - 2.0 * p.x() * p.y() * H(0, 1) +
                     (1.0 + p.x() * p.x()) * H(1, 1);
    r[k] = F / (W2 * std::sqrt(W2));
  });
  return r;
}

void DirichletData::validate(const PolarGrid& g) const {
  const std::size_t nr = g.n_rho(), nt = g.n_theta();
  if (rho_min.size() != nt || rho_max.size() != nt || theta_min.size() != nr || theta_max.size() != nr)
    throw Error("DirichletData: edge arrays do not match the grid");
  for (const auto* e : {&rho_min, &rho_max, &theta_min, &theta_max})
    for (std::size_t k = 0; k < e->size(); ++k)
      if (!std::isfinite((*e)[k])) throw Error("DirichletData: non-finite boundary value", {static_cast<long>(k)});
  auto agree = [](double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)); };
  if (!agree(rho_min.front(), theta_min.front()) || !agree(rho_min.back(), theta_max.front()) ||
      !agree(rho_max.front(), theta_min.back()) || !agree(rho_max.back(), theta_max.back()))
    throw Error("DirichletData: corner values disagree");
}

DirichletData boundary_of(const MultiGraph& u) {
  const PolarGrid& g = u.grid;
  DirichletData b;
  for (int j = 0; j < g.n_theta(); ++j) {
    b.rho_min.push_back(u.at(0, j));
    b.rho_max.push_back(u.at(g.n_rho() - 1, j));
  }
  for (int i = 0; i < g.n_rho(); ++i) {
    b.theta_min.push_back(u.at(i, 0));
    b.theta_max.push_back(u.at(i, g.n_theta() - 1));
  }
  return b;
}

DirichletData boundary_from_function(const PolarGrid& g, const std::function<double(double, double)>& f) {
  DirichletData b;
  const int nr = g.n_rho(), nt = g.n_theta();
  for (int j = 0; j < nt; ++j) {
    b.rho_min.push_back(f(g.rho(0), g.theta(j)));
    b.rho_max.push_back(f(g.rho(nr - 1), g.theta(j)));
  }
  for (int i = 0; i < nr; ++i) {
    b.theta_min.push_back(f(g.rho(i), g.theta(0)));
    b.theta_max.push_back(f(g.rho(i), g.theta(nt - 1)));
  }
  return b;
}

void SolveConfig::validate() const {
  if (max_newton_iters < 1) throw Error("SolveConfig: max_newton_iters must be >= 1");
  if (!(residual_tol > 0.0)) throw Error("SolveConfig: residual_tol must be positive");
  if (max_halvings < 0) throw Error("SolveConfig: max_halvings must be >= 0");
  if (initial_guess == InitialGuess::given && !given)
    throw Error("SolveConfig: initial guess 'given' without a graph");
}

std::vector<double> discrete_residual(const MultiGraph& u, Exec exec) {
  const FemMesh fm = build_fem(u.grid, exec);
  return normalized_residual(fm, tri_states(fm, u.values, exec), exec);
}

SolveReport solve_dirichlet(const PolarGrid& grid, const DirichletData& boundary, const SolveConfig& cfg) {
  cfg.validate();
  boundary.validate(grid);
  const Exec exec = cfg.exec;
  const FemMesh fm = build_fem(grid, exec);

  std::vector<double> u;
  switch (cfg.initial_guess) {
    case InitialGuess::zero:
      u.assign(grid.size(), 0.0);
      apply_boundary(grid, boundary, u);
      break;
    case InitialGuess::harmonic_extension:
      u = harmonic_extension(fm, boundary, exec);
      break;
    case InitialGuess::given:
      if (cfg.given->grid.size() != grid.size() || cfg.given->grid.n_theta() != grid.n_theta())
        throw Error("SolveConfig: given initial guess lives on a different grid");
      u = cfg.given->values;
      apply_boundary(grid, boundary, u);
      break;
  }

  SolveReport rep{0, kInfinity, false, MultiGraph(grid, u), {}, true, {}, {}};
  std::vector<TriState> st = tri_states(fm, u, exec);
  std::vector<double> r = normalized_residual(fm, st, exec);
  double merit = l2_norm(r);
  int increases = 0;

  for (int it = 1; it <= cfg.max_newton_iters; ++it) {
    rep.iterations = it;
    rep.residual = sup_norm(r);
    rep.history.push_back(rep.residual);
    if (rep.residual <= cfg.residual_tol) {
      rep.converged = true;
      break;
    }
    if (!std::isfinite(rep.residual)) {
      rep.message = "residual became non-finite";
      break;
    }
    const SpMat H = hessian(fm, st, exec);
    const Eigen::VectorXd step = linear_solve(H, -raw_gradient(fm, r));

    double lambda = 1.0;
    std::vector<double> trial;
    std::vector<TriState> trial_st;
    std::vector<double> trial_r;
    double trial_merit = kInfinity;
    const int halvings = cfg.damping == Damping::line_search ? cfg.max_halvings : 0;
    for (int h = 0; h <= halvings; ++h) {
      trial = u;
      for (long row = 0; row < step.size(); ++row) trial[fm.nodes_of_unknown[row]] += lambda * step[row];
      trial_st = tri_states(fm, trial, exec);
      trial_r = normalized_residual(fm, trial_st, exec);
      trial_merit = l2_norm(trial_r);
      if (trial_merit < merit) break;
      lambda *= 0.5;
    }
    increases = trial_merit < merit ? 0 : increases + 1;
    u = std::move(trial);
    st = std::move(trial_st);
    r = std::move(trial_r);
    merit = trial_merit;
    if (increases >= 5) {
      rep.iterations = it;
      rep.residual = sup_norm(r);
      rep.history.push_back(rep.residual);
      rep.message = "diverged: residual increased on 5 consecutive damped steps";
      break;
    }
  }
  if (!rep.converged && rep.message.empty()) {
    rep.residual = sup_norm(r);
    std::ostringstream os;
    os << "not converged after " << rep.iterations << " Newton iterations (residual "
       << rep.residual << ")";
    rep.message = os.str();
  }
  if (rep.converged) rep.message = "converged";

  rep.solution = MultiGraph(grid, u);
  rep.solution.solver_residual = rep.residual;
  if (rep.converged) {
    rep.max_principle_ok = max_principle_holds(grid, u);
    if (!rep.max_principle_ok) rep.warnings.push_back("discrete maximum principle violated");
  }
  return rep;
}

double bump_sup(const PolarGrid& g, const BoundaryBump& bump) {
  double s = 0.0;
  for (long k = 0; k < g.size(); ++k)
    if (on_boundary(g, k))
      s = std::max(s, std::abs(bump(g.rho(g.radial_index(k)), g.theta(g.angular_index(k)))));
  return s;
}

SolveReport perturb_and_solve(const MultiGraph& base, const BoundaryBump& bump, SolveConfig cfg) {
  base.validate();
  const PolarGrid& g = base.grid;
  double bmax = -kInfinity, bmin = kInfinity;
  for (long k = 0; k < g.size(); ++k)
    if (on_boundary(g, k)) {
      bmax = std::max(bmax, base.values[k]);
      bmin = std::min(bmin, base.values[k]);
    }
  std::vector<std::string> warnings;
  const double bs = bump_sup(g, bump);
  if (bs > 0.2 * (bmax - bmin)) {
    std::ostringstream os;
    os << "bump sup " << bs << " exceeds 0.2 x base boundary oscillation " << (bmax - bmin);
    warnings.push_back(os.str());
  }
  DirichletData b = boundary_of(base);
  const int nr = g.n_rho(), nt = g.n_theta();
  for (int j = 0; j < nt; ++j) {
    b.rho_min[j] += bump(g.rho(0), g.theta(j));
    b.rho_max[j] += bump(g.rho(nr - 1), g.theta(j));
  }
  for (int i = 0; i < nr; ++i) {
    b.theta_min[i] += bump(g.rho(i), g.theta(0));
    b.theta_max[i] += bump(g.rho(i), g.theta(nt - 1));
  }
  cfg.initial_guess = InitialGuess::given;
  cfg.given = base;
  SolveReport rep = solve_dirichlet(g, b, cfg);
  rep.solution.center = base.center;
  rep.solution.frame = base.frame;
  rep.warnings.insert(rep.warnings.begin(), warnings.begin(), warnings.end());
  return rep;
}

}  // namespace hf

#pragma once

#include "hf/exact_surfaces.hpp"
#include "hf/helicoid_fit.hpp"

#include <memory>
#include <random>

namespace hf::test {

inline MultiGraph helicoid(const PolarGrid& g, double a = 1.0) {
  SurfaceParams p;
  p.pitch = a;
  return *make_surface(SurfaceKind::helicoid, p, g).graph;
}

inline MultiGraph tilted_plane(const PolarGrid& g, double tx, double ty = 0.0) {
  SurfaceParams p;
  p.tilt = Vec2(tx, ty);
  return *make_surface(SurfaceKind::plane, p, g).graph;
}

inline MultiGraph catenoid(const PolarGrid& g, double neck = 1.0) {
  SurfaceParams p;
  p.neck = neck;
  return *make_surface(SurfaceKind::catenoid, p, g).graph;
}

/// Graph with closed form attached under a custom descriptor.
inline MultiGraph analytic(const PolarGrid& g, GraphFunction f, const std::string& name = "custom") {
  auto a = std::make_shared<AnalyticGraph>();
  a->eval = std::move(f);
  a->descriptor = {{"kind", name}};
  return MultiGraph::from_analytic(g, a);
}

/// Same values, no closed form: derivatives come from finite differences.
inline MultiGraph sampled(const MultiGraph& u) { return MultiGraph(u.grid, u.values); }

inline PolarGrid annulus(double r1, double r2, double half_turns, int n_rho, int n_theta) {
  return PolarGrid(PolarRect{r1, r2, -kPi * half_turns, kPi * half_turns}, n_rho, n_theta);
}

inline double sup_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

/// Mesh moved to x + nu(x) n(x).
inline MeshPatch offset_mesh(const MeshPatch& base, const std::vector<double>& nu) {
  MeshPatch m = base;
  for (long v = 0; v < m.vertex_count(); ++v) m.vertices[v] += nu[v] * base.normals[v];
  m.normals = area_weighted_normals(m);
  m.A2.clear();
  m.shape.clear();
  return m;
}

/// Smooth random offsets (a few random plane waves) scaled so that
/// sup(|nu| + |grad nu|) over the base equals eps.
inline std::vector<double> random_smooth_offsets(const MeshPatch& base, std::uint64_t seed, double eps) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::vector<double> nu(base.vertices.size(), 0.0);
  for (int w = 0; w < 4; ++w) {
    const Vec3 k(normal(rng), normal(rng), normal(rng));
    const double amp = normal(rng), ph = phase(rng);
    for (std::size_t v = 0; v < nu.size(); ++v) nu[v] += amp * std::sin(k.dot(base.vertices[v]) + ph);
  }
  const double s = normal_graph_from_offsets(base, nu).sup_norm;
  for (double& x : nu) x *= eps / s;
  return nu;
}

}  // namespace hf::test

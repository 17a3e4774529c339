#include "helpers.hpp"

#include "hf/asymptotics.hpp"
#include "hf/gauss.hpp"
#include "hf/helicoid_fit.hpp"

#include <doctest.h>

#include <cstdlib>
#include <cstring>

using namespace hf;

namespace {

// Bitwise equality, NaN-safe.
bool same(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool same(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (!same(a[k], b[k])) return false;
  return true;
}

template <typename M>
bool same_eigen(const std::vector<M>& a, const std::vector<M>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (std::memcmp(a[k].data(), b[k].data(), sizeof(double) * a[k].size()) != 0) return false;
  return true;
}

bool same(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (!same(a[k].real(), b[k].real()) || !same(a[k].imag(), b[k].imag())) return false;
  return true;
}

MultiGraph wavy(const PolarGrid& g) {
  return MultiGraph::from_function(g, [](double r, double t) { return PolarJet{t + 0.3 * std::sin(2 * t) / r + 0.01 * r}; });
}

}  // namespace

TEST_SUITE("parallel") {

TEST_CASE("thread count honours HF_THREADS") {
  if (const char* env = std::getenv("HF_THREADS")) CHECK(max_threads() == std::atoi(env));
  CHECK(max_threads() >= 1);
}

TEST_CASE("graph kernels") {
  const PolarGrid g = PolarGrid::per_turn(PolarRect{1, 6, -3 * kPi, 3 * kPi}, 40, 64);
  const MultiGraph u = wavy(g);
  const Derivatives ds = derivatives(u, DerivativeSource::automatic, Exec::serial);
  const Derivatives dp = derivatives(u, DerivativeSource::automatic, Exec::parallel);
  CHECK(same_eigen(ds.grad, dp.grad));
  CHECK(same_eigen(ds.hess, dp.hess));
  const MeshPatch ms = graph_embed(u, Exec::serial), mp = graph_embed(u, Exec::parallel);
  CHECK(same_eigen(ms.vertices, mp.vertices));
  CHECK(same_eigen(ms.normals, mp.normals));
  CHECK(same(ms.A2, mp.A2));
  CHECK(same(mse_residual(u, DerivativeSource::automatic, Exec::serial), mse_residual(u, DerivativeSource::automatic, Exec::parallel)));
  CHECK(same(discrete_residual(u, Exec::serial), discrete_residual(u, Exec::parallel)));
  CHECK(same(complex_gradient(u, Exec::serial), complex_gradient(u, Exec::parallel)));
  const FlatnessField fs = flatness_terms(u, Exec::serial), fp = flatness_terms(u, Exec::parallel);
  CHECK(same(fs.value, fp.value));
  const GaussField gs = gauss_from_graph(u, Exec::serial), gp = gauss_from_graph(u, Exec::parallel);
  CHECK(same(gs.g, gp.g));
  CHECK(same(gs.grad_x3, gp.grad_x3));
}

TEST_CASE("asymptotics kernels") {
  const PolarGrid g = PolarGrid::per_turn(PolarRect{1, 16, -3 * kPi, 3 * kPi}, 40, 64);
  const MultiGraph u = wavy(g);
  const LaurentFit ls = laurent_fit(u, 2.0, {4, 8, 16}, {}, Exec::serial), lp = laurent_fit(u, 2.0, {4, 8, 16}, {}, Exec::parallel);
  CHECK(same(ls.c.real(), lp.c.real()));
  CHECK(same(ls.c.imag(), lp.c.imag()));
  CHECK(same(ls.remainder_sup, lp.remainder_sup));
  const SpiralReport ss = spiral_threshold(u, 2.0, 0.1, 512, Exec::serial), sp = spiral_threshold(u, 2.0, 0.1, 512, Exec::parallel);
  CHECK(same(ss.min_u_theta, sp.min_u_theta));
  CHECK(same(ss.C3, sp.C3));
}

TEST_CASE("solver") {
  const PolarGrid g(PolarRect{1, 4, -kPi, kPi}, 24, 48);
  SolveConfig s, p;
  s.exec = Exec::serial;
  p.exec = Exec::parallel;
  const DirichletData d = boundary_from_function(g, [](double r, double t) { return t + 0.05 * std::sin(3 * t) * r; });
  const SolveReport rs = solve_dirichlet(g, d, s), rp = solve_dirichlet(g, d, p);
  CHECK(rs.iterations == rp.iterations);
  CHECK(same(rs.history, rp.history));
  CHECK(same(rs.solution.values, rp.solution.values));
}

TEST_CASE("mesh kernels") {
  MeshPatch m = helicoid_ball_mesh(HelicoidModel{}, 4.0, 61, 121);
  const CurvatureFit cs = quadric_curvature(m, Exec::serial), cp = quadric_curvature(m, Exec::parallel);
  CHECK(same(cs.A2, cp.A2));
  CHECK(same_eigen(cs.shape, cp.shape));

  BlowUpOptions os, op;
  os.exec = Exec::serial;
  op.exec = Exec::parallel;
  const BlowUpReport bs = detect_blowup_pairs(m, std::sqrt(2.0), os), bp = detect_blowup_pairs(m, std::sqrt(2.0), op);
  REQUIRE(bs.pairs.size() == bp.pairs.size());
  for (std::size_t k = 0; k < bs.pairs.size(); ++k) CHECK(bs.pairs[k].vertex == bp.pairs[k].vertex);
  CHECK(bs.discarded_boundary == bp.discarded_boundary);

  const std::vector<double> levels{-3.3, -0.5, 0.0, 1.25, 3.9};
  const auto ts = trace_level_sets(m, levels, Exec::serial), tp = trace_level_sets(m, levels, Exec::parallel);
  for (std::size_t k = 0; k < levels.size(); ++k) {
    REQUIRE(ts[k].components() == tp[k].components());
    for (int c = 0; c < ts[k].components(); ++c) CHECK(same_eigen(ts[k].polylines[c].points, tp[k].polylines[c].points));
  }

  const std::vector<double> nu = test::random_smooth_offsets(m, 5, 0.01);
  CHECK(same_eigen(tangential_gradient(m, nu, Exec::serial), tangential_gradient(m, nu, Exec::parallel)));
  const NormalGraph ns = normal_graph_from_offsets(m, nu, Exec::serial), np = normal_graph_from_offsets(m, nu, Exec::parallel);
  const DistortionReport ds = phi_distortion(ns, Exec::serial), dp = phi_distortion(np, Exec::parallel);
  CHECK(same(ds.sigma_min, dp.sigma_min));
  CHECK(same(ds.sigma_max, dp.sigma_max));
  const MeshPatch target = test::offset_mesh(m, nu);
  NormalGraphOptions gs, gp;
  gs.exec = Exec::serial;
  gp.exec = Exec::parallel;
  CHECK(same(build_normal_graph(m, target, gs).nu, build_normal_graph(m, target, gp).nu));
}

TEST_CASE("curve and fit kernels") {
  const CurveSamples c = weierstrass_curve({0.25, 1.0}, -10, 10, 2048);
  const EmbeddednessVerdict vs = embeddedness_verdict(c, 1e-9, Exec::serial), vp = embeddedness_verdict(c, 1e-9, Exec::parallel);
  CHECK(vs.embedded == vp.embedded);
  CHECK(same(vs.t_a, vp.t_a));
  CHECK(same(vs.min_separation, vp.min_separation));

  const MeshPatch patch = helicoid_ball_mesh(HelicoidModel{}, 3.0, 31, 61);
  FitOptions fs, fp;
  fs.exec = Exec::serial;
  fp.exec = Exec::parallel;
  const HelicoidFit a = fit_helicoid(patch, fs), b = fit_helicoid(patch, fp);
  CHECK(same(a.model.pitch, b.model.pitch));
  CHECK(same(a.residual, b.residual));
  CHECK(a.best_restart == b.best_restart);
}

}

#include "helpers.hpp"

#include "hf/gauss.hpp"

#include <doctest.h>

#include <random>

using namespace hf;

namespace {

MeshPatch two_bumps() {
  MeshPatch m = plane_mesh(3.0, 61);
  for (Vec3& x : m.vertices) {
    const double a = (x - Vec3(1.2, 0, 0)).head<2>().squaredNorm(), b = (x + Vec3(1.2, 0, 0)).head<2>().squaredNorm();
    x.z() = std::exp(-2 * a) + std::exp(-2 * b);
  }
  m.normals = area_weighted_normals(m);
  return m;
}

}  // namespace

TEST_SUITE("gauss") {

TEST_CASE("gauss_from_graph examples") {
  const PolarGrid g(PolarRect{1, 4, -kPi, kPi}, 31, 65, RadialSpacing::uniform);
  const long k = g.index(0, 32);  // rho = 1, theta = 0
  SUBCASE("helicoid at rho = 1") {
    const GaussField f = gauss_from_graph(test::helicoid(g));
    CHECK(std::abs(f.g[k]) == doctest::Approx(std::sqrt(2.0) + 1));
    const double a = std::abs(f.g[k]);
    CHECK(2 * a / (1 + a * a) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(f.grad_x3[k] == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(f.analytic);
    CHECK(f.masked_count == 0);
  }
  SUBCASE("closed form of |g| on the helicoid") {
    const GaussField f = gauss_from_graph(test::helicoid(g));
    for (int i = 0; i < g.n_rho(); ++i) {
      const double rho = g.rho(i);
      CHECK(std::abs(f.g[g.index(i, 5)]) == doctest::Approx(std::sqrt(rho * rho + 1) + rho));
      CHECK(f.grad_x3[g.index(i, 5)] == doctest::Approx(1 / std::sqrt(rho * rho + 1)));
    }
  }
  SUBCASE("tilted plane u = x1") {
    const GaussField f = gauss_from_graph(test::tilted_plane(g, 1.0));
    for (double v : f.grad_x3) CHECK(v == doctest::Approx(1 / std::sqrt(2.0)));
  }
  SUBCASE("flat patch") {
    CHECK_THROWS_AS(gauss_from_graph(MultiGraph(g, std::vector<double>(g.size(), 0.0))), Error);
  }
}

TEST_CASE("Gauss identity") {
  const PolarGrid g(PolarRect{1.5, 6, -2 * kPi, 2 * kPi}, 32, 128);
  CHECK(check_gauss_identity(gauss_from_graph(test::helicoid(g, 0.8))) <= 1e-10);
  CHECK(check_gauss_identity(gauss_from_graph(test::tilted_plane(g, 0.3, 0.4))) <= 1e-10);
  CHECK(check_gauss_identity(gauss_from_graph(test::catenoid(g, 1.0))) <= 1e-10);
  const PolarGrid fine(PolarRect{1, 4, -kPi, kPi}, 128, 128);
  const GaussField fd = gauss_from_graph(test::sampled(test::helicoid(fine)));
  CHECK_FALSE(fd.analytic);
  CHECK(check_gauss_identity(fd) <= 1e-4);
}

TEST_CASE("gradient bound 2 exp(-|h1|)") {
  const PolarGrid g(PolarRect{0.2, 50, -kPi, kPi}, 64, 33);
  const GaussField f = gauss_from_graph(test::helicoid(g));
  CHECK(gauss_inequality_excess(f) <= 0.0);
  // the bound tightens away from the axis: ratio -> 1
  double prev = 0.0;
  for (int i = 0; i < g.n_rho(); i += 8) {
    const long k = g.index(i, 3);
    const double ratio = f.grad_x3[k] / (2 * std::exp(-std::abs(std::log(std::abs(f.g[k])))));
    CHECK(ratio <= 1.0);
    CHECK(ratio > prev);
    prev = ratio;
  }
  CHECK(prev > 0.999);
  CHECK(gauss_inequality_excess(gauss_from_graph(test::catenoid(g, 0.1))) <= 0.0);
}

TEST_CASE("log_gauss_branch examples") {
  const PolarGrid g(PolarRect{1, 8, -kPi, kPi}, 57, 129, RadialSpacing::uniform);
  const GaussField f = gauss_from_graph(test::helicoid(g));
  SUBCASE("theta = 0 ray") {
    std::vector<long> ray;
    for (int i = 0; i < g.n_rho(); ++i) ray.push_back(g.index(i, 64));
    const LogBranch b = log_gauss_branch(f, ray);
    CHECK(b.h1[0] == doctest::Approx(std::log(1 + std::sqrt(2.0))));
    CHECK(b.h1[0] == doctest::Approx(0.8814).epsilon(1e-4));
    for (std::size_t k = 1; k < ray.size(); ++k) {
      CHECK(b.h1[k] > b.h1[k - 1]);
      CHECK(b.h1[k] == doctest::Approx(std::asinh(g.rho(static_cast<int>(k)))));
      CHECK(b.h2[k] == doctest::Approx(b.h2[0]));
    }
  }
  SUBCASE("loop around the broken circle turns by 2 pi") {
    std::vector<long> loop;
    for (int j = 0; j < g.n_theta(); ++j) loop.push_back(g.index(8, j));
    const LogBranch b = log_gauss_branch(f, loop);
    CHECK(b.h2.back() - b.h2.front() == doctest::Approx(kTwoPi));
  }
  SUBCASE("constant g") {
    const GaussField p = gauss_from_graph(test::tilted_plane(g, 0.5, 0.5));
    std::vector<long> path;
    for (int j = 0; j < g.n_theta(); j += 7) path.push_back(g.index(j % g.n_rho(), j));
    const LogBranch b = log_gauss_branch(p, path);
    for (std::size_t k = 1; k < path.size(); ++k) {
      CHECK(b.h1[k] == doctest::Approx(b.h1[0]).epsilon(1e-12));
      CHECK(b.h2[k] == doctest::Approx(b.h2[0]).epsilon(1e-12));
    }
  }
  SUBCASE("coarse path") {
    CHECK_THROWS_AS(log_gauss_branch(f, {g.index(0, 0), g.index(0, 64)}), Error);
  }
}

TEST_CASE("trace_level_set examples") {
  SUBCASE("helicoid ball, c = 0") {
    const MeshPatch m = helicoid_ball_mesh(HelicoidModel{}, 6.0, 121, 241);
    const LevelSetTrace t = trace_level_set(m, 0.0);
    CHECK(t.components() == 1);
    CHECK(t.perturbed);
    CHECK(std::abs(t.level_used) <= 1e-10);
    CHECK_FALSE(t.polylines[0].closed);
  }
  SUBCASE("two bumps give two closed curves") {
    const MeshPatch m = two_bumps();
    const LevelSetTrace t = trace_level_set(m, 0.5);
    CHECK(t.components() == 2);
    for (const Polyline& p : t.polylines) CHECK(p.closed);
    CHECK(trace_level_set(m, 0.05).components() == 1);
  }
  SUBCASE("plane at its own height") {
    const LevelSetTrace t = trace_level_set(plane_mesh(1.0, 5), 0.0);
    CHECK(t.perturbed);
    CHECK(t.components() == 0);
  }
  SUBCASE("outside the range") {
    CHECK_THROWS_AS(trace_level_set(plane_mesh(1.0, 5), 1.0), Error);
  }
}

TEST_CASE("random levels on the helicoid ball trace one curve each") {
  const MeshPatch m = helicoid_ball_mesh(HelicoidModel{}, 6.0, 121, 241);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pick(-5.7, 5.7);
  std::vector<double> levels(100);
  for (double& c : levels) c = pick(rng);
  const std::vector<LevelSetTrace> traces = trace_level_sets(m, levels);
  REQUIRE(traces.size() == levels.size());
  for (const LevelSetTrace& t : traces) CHECK(t.components() == 1);
}

TEST_CASE("decompose examples") {
  const MeshPatch m = helicoid_ball_mesh(HelicoidModel{}, 6.0, 121, 241);
  const std::vector<BlowUpPair> pairs = detect_blowup_pairs(m, std::sqrt(2.0)).pairs;
  REQUIRE_FALSE(pairs.empty());
  SUBCASE("eps0 = 0.5") {
    const DecompositionLabeling d = decompose(m, pairs);
    CHECK(d.status == "ok");
    CHECK(d.gamma0 == doctest::Approx(std::log(4.0)));
    CHECK(d.ra_violations.empty());
    CHECK(d.rs_violations.empty());
    CHECK(d.count_RA + d.count_RS1 + d.count_RS2 == m.vertex_count());
    CHECK(d.count_RS1 > 0);
    CHECK(d.count_RS2 > 0);
    for (long v = 0; v < m.vertex_count(); ++v) {
      const double rho = m.vertices[v].head<2>().norm();
      if (rho <= std::sqrt(3.0) - 0.1) CHECK(d.label[v] == Region::RA);
      if (d.label[v] == Region::RA) CHECK(d.grad_x3[v] >= 0.5 - 1e-12);
    }
  }
  SUBCASE("eps0 = 0.99 shrinks toward the axis") {
    DecomposeOptions opt;
    opt.epsilon0 = 0.99;
    const DecompositionLabeling d = decompose(m, pairs, opt);
    const double bound = std::sqrt(1 / (0.99 * 0.99) - 1);
    for (long v = 0; v < m.vertex_count(); ++v)
      if (d.label[v] == Region::RA) CHECK(m.vertices[v].head<2>().norm() <= bound + 0.05);
    CHECK(d.ra_violations.empty());
  }
  SUBCASE("plane is vacuous") {
    MeshPatch p = plane_mesh(2.0, 11);
    const DecompositionLabeling d = decompose(p, {});
    CHECK(d.status != "ok");
    CHECK(d.count_RA == 0);
  }
  SUBCASE("bad options") {
    DecomposeOptions opt;
    opt.epsilon0 = 1.5;
    CHECK_THROWS_AS(decompose(m, pairs, opt), Error);
  }
}

TEST_CASE("level curves are monotone along the spiraling region") {
  // On each level curve the signed distance along the horizontal line of the
  // curve plays the role of the conjugate coordinate; it must be strictly
  // monotone across the spiraling part.
  const MeshPatch m = helicoid_ball_mesh(HelicoidModel{}, 6.0, 121, 241);
  const DecompositionLabeling d = decompose(m, detect_blowup_pairs(m, std::sqrt(2.0)).pairs);
  const MeshTopology topo = build_topology(m);
  for (double c : {-4.1, -1.3, 0.37, 2.9, 0.0}) {
    const LevelSetTrace t = trace_level_set(m, topo, c);
    REQUIRE(t.components() == 1);
    const Polyline& p = t.polylines[0];
    const Vec3 dir(std::cos(t.level_used), std::sin(t.level_used), 0.0);
    double prev = 0.0;
    int dir_sign = 0, used = 0;
    for (std::size_t k = 0; k < p.points.size(); ++k) {
      const auto& e = topo.edges[p.edges[k]];
      if (d.label[e.a] == Region::RA || d.label[e.b] == Region::RA) continue;
      const double s = p.points[k].dot(dir);
      // crossings next to a perturbed vertex hit coincide; count them once
      if (used > 0 && std::abs(s - prev) <= 1e-9) continue;
      if (used > 0) {
        const int sg = s > prev ? 1 : (s < prev ? -1 : 0);
        CHECK(sg != 0);
        if (dir_sign == 0) dir_sign = sg;
        CHECK(sg == dir_sign);
      }
      prev = s;
      ++used;
    }
    CHECK(used > 10);
  }
}

}

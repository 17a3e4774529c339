#include "helpers.hpp"

#include <doctest.h>

#include <map>

using namespace hf;
using hf::test::annulus;

TEST_SUITE("geometry") {

TEST_CASE("polar rectangle and grid validation") {
  CHECK_THROWS_AS(PolarRect({0.0, 1.0, 0.0, 1.0}).validate(), Error);
  CHECK_THROWS_AS(PolarRect({2.0, 1.0, 0.0, 1.0}).validate(), Error);
  CHECK_THROWS_AS(PolarRect({1.0, 2.0, 1.0, 1.0}).validate(), Error);
  CHECK_THROWS_AS(PolarGrid(PolarRect{1, 2, 0, kTwoPi}, 3, 16), Error);
  CHECK_THROWS_AS(PolarGrid(PolarRect{1, 2, 0, kTwoPi}, 8, 7), Error);

  const PolarGrid g(PolarRect{1, 4, 0, kTwoPi}, 9, 16);
  CHECK(g.rho(0) == doctest::Approx(1.0));
  CHECK(g.rho(8) == doctest::Approx(4.0));
  // geometric spacing: constant ratio
  CHECK(g.rho(1) / g.rho(0) == doctest::Approx(g.rho(8) / g.rho(7)));
  for (int i = 1; i < g.n_rho(); ++i) CHECK(g.rho(i) > g.rho(i - 1));
  CHECK(g.index(2, 3) == 2 * 16 + 3);

  const PolarGrid uni(PolarRect{1, 4, 0, kTwoPi}, 7, 16, RadialSpacing::uniform);
  CHECK(uni.rho(1) - uni.rho(0) == doctest::Approx(uni.rho(6) - uni.rho(5)));
}

TEST_CASE("infinite outer radius is truncated and recorded") {
  const PolarGrid g(PolarRect{1, kInfinity, 0, kTwoPi}, 16, 16, RadialSpacing::geometric, 50.0);
  CHECK(g.truncated());
  CHECK(g.rho(g.n_rho() - 1) == doctest::Approx(50.0));
}

TEST_CASE("graph_embed examples") {
  SUBCASE("zero graph is a flat annulus") {
    const MultiGraph u = MultiGraph::from_function(PolarGrid(PolarRect{1, 2, 0, kTwoPi}, 8, 32), [](double, double) { return PolarJet{}; });
    const MeshPatch m = graph_embed(u);
    for (const Vec3& x : m.vertices) {
      CHECK(x.z() == 0.0);
      CHECK(x.head<2>().norm() >= 1.0 - 1e-12);
      CHECK(x.head<2>().norm() <= 2.0 + 1e-12);
    }
    for (double a2 : m.A2) CHECK(a2 == doctest::Approx(0.0));
  }
  SUBCASE("helicoid node (1, pi) maps to (-1, 0, pi)") {
    const PolarGrid g(PolarRect{1, 4, -kPi, kPi}, 8, 16);
    const MeshPatch m = graph_embed(test::helicoid(g));
    const Vec3 x = m.vertices[g.index(0, 16 - 1)];
    CHECK(x.x() == doctest::Approx(-1.0));
    CHECK(x.y() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(x.z() == doctest::Approx(kPi));
  }
  SUBCASE("two turns give stacked, unwelded vertices") {
    const PolarGrid g(PolarRect{1, 2, -2 * kPi, 2 * kPi}, 6, 64);
    const MeshPatch m = graph_embed(test::helicoid(g));
    CHECK(m.vertex_count() == g.size());
    std::map<std::pair<long, long>, int> over;
    for (const Vec3& x : m.vertices) over[{std::lround(x.x() * 1e6), std::lround(x.y() * 1e6)}]++;
    int stacked = 0;
    for (const auto& [key, count] : over) stacked += count >= 2;
    CHECK(stacked > 0);
    const MeshTopology topo = build_topology(m);
    CHECK(topo.manifold());
    CHECK(topo.component_count == 1);
  }
  SUBCASE("non-finite value is rejected with its node") {
    const PolarGrid g(PolarRect{1, 2, 0, kTwoPi}, 6, 16);
    std::vector<double> v(g.size(), 0.0);
    v[17] = std::nan("");
    try {
      graph_embed(MultiGraph(g, v));
      FAIL("expected an error");
    } catch (const Error& e) {
      REQUIRE(e.indices().size() == 1);
      CHECK(e.indices()[0] == 17);
    }
  }
}

TEST_CASE("vertical translation shifts the embedding exactly") {
  const PolarGrid g = annulus(1, 3, 1, 10, 40);
  const MultiGraph u = test::helicoid(g);
  const MeshPatch a = graph_embed(u), b = graph_embed(add_constant(u, 2.5));
  for (long v = 0; v < a.vertex_count(); ++v) {
    CHECK(b.vertices[v].x() == a.vertices[v].x());
    CHECK(b.vertices[v].y() == a.vertices[v].y());
    CHECK(b.vertices[v].z() == a.vertices[v].z() + 2.5);
  }
}

TEST_CASE("derivative examples") {
  const PolarGrid g(PolarRect{1, 4, -kPi, kPi}, 33, 64);
  SUBCASE("constant") {
    const Derivatives d = derivatives(MultiGraph(g, std::vector<double>(g.size(), 3.0)));
    for (long k = 0; k < g.size(); ++k) {
      CHECK(d.grad[k].norm() < 1e-12);
      CHECK(d.hess[k].norm() < 1e-9);
    }
  }
  SUBCASE("u = theta has |grad u| = 1 / rho") {
    const Derivatives d = derivatives(test::sampled(test::helicoid(g)));
    for (int i = 0; i < g.n_rho(); ++i)
      for (int j = 0; j < g.n_theta(); ++j) CHECK(d.grad[g.index(i, j)].norm() == doctest::Approx(1.0 / g.rho(i)).epsilon(1e-9));
    const PolarGrid g2(PolarRect{1, 4, -kPi, kPi}, 31, 64, RadialSpacing::uniform);
    const Derivatives d2 = derivatives(test::sampled(test::helicoid(g2)));
    CHECK(d2.grad[g2.index(10, 5)].norm() == doctest::Approx(0.5));  // rho = 2
  }
  SUBCASE("u = x1 has Cartesian gradient (1, 0)") {
    const Derivatives d = derivatives(test::sampled(test::tilted_plane(g, 1.0)));
    for (long k = 0; k < g.size(); ++k) {
      CHECK(d.grad[k].x() == doctest::Approx(1.0).epsilon(1e-3));
      CHECK(std::abs(d.grad[k].y()) < 1e-3);
    }
  }
  SUBCASE("minimum grid size is enough for the stencil") {
    const PolarGrid tiny(PolarRect{1, 2, 0, 1}, 4, 8);
    CHECK_NOTHROW(derivatives(MultiGraph(tiny, std::vector<double>(tiny.size(), 0.0))));
  }
}

TEST_CASE("finite differences converge at second order") {
  // A smooth non-polynomial field; u = a theta is reproduced exactly by the
  // stencils and has no error to measure.
  const GraphFunction f = [](double r, double t) {
    PolarJet j;
    j.u = t + std::sin(t) * std::log(r);
    j.u_r = std::sin(t) / r;
    j.u_t = 1.0 + std::cos(t) * std::log(r);
    return j;
  };
  std::vector<double> err;
  for (int n : {16, 32, 64, 128}) {
    const PolarGrid g(PolarRect{1, 4, 0, kTwoPi}, n + 1, 2 * n);
    const MultiGraph u = MultiGraph::from_function(g, f);
    const Derivatives d = derivatives(u);
    double e = 0.0;
    for (int i = 0; i < g.n_rho(); ++i)
      for (int j = 0; j < g.n_theta(); ++j) {
        const PolarJet x = f(g.rho(i), g.theta(j));
        e = std::max(e, std::abs(d.grad[g.index(i, j)].norm() - cartesian_gradient(x, g.rho(i), g.theta(j)).norm()));
      }
    err.push_back(e);
  }
  for (std::size_t k = 1; k < err.size(); ++k) {
    INFO("ratio " << err[k - 1] / err[k]);
    CHECK(err[k - 1] / err[k] >= 3.5);
    CHECK(err[k - 1] / err[k] <= 4.5);
  }
}

TEST_CASE("separation examples") {
  const PolarGrid g = PolarGrid::per_turn(PolarRect{1, 3, -2 * kPi, 2 * kPi}, 8, 32);
  SUBCASE("helicoid") {
    const Separation s = separation(test::helicoid(g, 1.0));
    REQUIRE_FALSE(s.empty);
    for (double w : s.w) CHECK(w == doctest::Approx(kTwoPi));
    CHECK(s.sign == 1);
  }
  SUBCASE("zero graph is not embedded") {
    const Separation s = separation(MultiGraph(g, std::vector<double>(g.size(), 0.0)));
    CHECK(s.sign == 0);
    CHECK(s.zero_nodes.size() == s.w.size());
  }
  SUBCASE("periodic perturbation cancels") {
    const MultiGraph u = MultiGraph::from_function(g, [](double, double t) { return PolarJet{t + 0.1 * std::sin(t)}; });
    for (double w : separation(u).w) CHECK(std::abs(w - kTwoPi) <= 1e-12);
  }
  SUBCASE("less than one turn gives an empty overlap") {
    const PolarGrid h(PolarRect{1, 3, 0, kPi}, 8, 16);
    CHECK(separation(test::helicoid(h)).empty);
  }
}

TEST_CASE("separation ignores any 2pi-periodic addition") {
  const PolarGrid g = PolarGrid::per_turn(PolarRect{1, 3, -2 * kPi, 2 * kPi}, 10, 48);
  const MultiGraph u = test::helicoid(g, 0.7);
  const MultiGraph v = add_function(u, [](double r, double t) { return PolarJet{std::cos(3 * t) * r + std::sin(t)}; });
  const Separation a = separation(u), b = separation(v);
  REQUIRE(a.w.size() == b.w.size());
  for (std::size_t k = 0; k < a.w.size(); ++k) CHECK(std::abs(a.w[k] - b.w[k]) <= 1e-12);
}

TEST_CASE("second fundamental form examples") {
  const PolarGrid g(PolarRect{0.5, 2, -kPi, kPi}, 31, 64, RadialSpacing::uniform);
  SUBCASE("plane") {
    for (double a2 : second_fundamental(test::tilted_plane(g, 0.3, -0.2))) CHECK(a2 == doctest::Approx(0.0));
  }
  SUBCASE("helicoid at rho = 1 from the graph formula") {
    const std::vector<double> a2 = second_fundamental(test::helicoid(g));
    CHECK(a2[g.index(10, 7)] == doctest::Approx(0.5).epsilon(1e-12));
    const std::vector<double> fd = second_fundamental(test::sampled(test::helicoid(g)));
    CHECK(fd[g.index(10, 7)] == doctest::Approx(0.5).epsilon(1e-3));
  }
  SUBCASE("helicoid axis on a mesh") {
    const MeshPatch m = helicoid_ball_mesh(HelicoidModel{}, 2.0, 81, 81);
    MeshPatch bare = m;
    bare.A2.clear();
    bare.shape.clear();
    const std::vector<double> q = second_fundamental(bare);
    double axis_max = 0.0, worst = 0.0;
    for (long v = 0; v < m.vertex_count(); ++v) {
      if (m.vertices[v].head<2>().norm() < 1e-12) axis_max = std::max(axis_max, m.A2[v]);
      if (m.vertices[v].norm() < 1.5) worst = std::max(worst, std::abs(q[v] - m.A2[v]));
    }
    CHECK(axis_max == doctest::Approx(2.0));
    CHECK(worst < 2e-2);  // quadric fit against the closed form
  }
  SUBCASE("degenerate triangle") {
    MeshPatch m = plane_mesh(1.0, 5);
    m.vertices[m.triangles[0][1]] = m.vertices[m.triangles[0][0]];
    m.normals = area_weighted_normals(m);
    CHECK_THROWS_AS(second_fundamental(m), Error);
  }
}

TEST_CASE("mesh and graph curvature agree") {
  const PolarGrid g(PolarRect{1, 3, -kPi, kPi}, 41, 160);
  const MultiGraph u = test::helicoid(g);
  MeshPatch m = graph_embed(u);
  const std::vector<double> exact = m.A2;
  m.A2.clear();
  m.shape.clear();
  const std::vector<double> q = second_fundamental(m);
  const MeshTopology topo = build_topology(m);
  double worst = 0.0;
  for (long v = 0; v < m.vertex_count(); ++v)
    if (!topo.boundary_vertex[v]) worst = std::max(worst, std::abs(q[v] - exact[v]));
  CHECK(worst < 2e-2);
}

TEST_CASE("curvature is invariant under rigid motion") {
  MeshPatch m = helicoid_ball_mesh(HelicoidModel{}, 2.0, 41, 61);
  m.A2.clear();
  m.shape.clear();
  const std::vector<double> a = second_fundamental(m);
  const MeshPatch moved = transformed(m, rotation_from_vector(Vec3(0.4, -0.7, 1.1)), Vec3(3, -2, 5));
  const std::vector<double> b = second_fundamental(moved);
  for (std::size_t v = 0; v < a.size(); ++v) CHECK(std::abs(a[v] - b[v]) <= 1e-8);
}

TEST_CASE("cone membership examples") {
  CHECK(cone_membership(Vec3::Zero(), Cone{Vec3::Zero(), 1.0}));
  CHECK_FALSE(cone_membership(Vec3(1, 0, 2), Cone{Vec3::Zero(), 1.0}));
  CHECK(cone_membership(Vec3(3, 4, 5), Cone{Vec3::Zero(), 1.0}));
  CHECK(cone_membership(Vec3(4, 5, 6), Cone{Vec3(1, 1, 1), 1.0}));
}

TEST_CASE("mesh validation") {
  MeshPatch m = plane_mesh(1.0, 4);
  CHECK_NOTHROW(m.validate());
  m.triangles[0][2] = 999;
  CHECK_THROWS_AS(m.validate(), Error);
  m = plane_mesh(1.0, 4);
  m.normals[3] *= 1.1;
  CHECK_THROWS_AS(m.validate(), Error);
}

TEST_CASE("point grid radius query") {
  std::vector<Vec3> pts;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) pts.emplace_back(i * 0.1, j * 0.1, 0.0);
  const PointGrid pg(pts, 0.15);
  const std::vector<int> hit = pg.within(Vec3(0.5, 0.5, 0.0), 0.1 + 1e-12);
  CHECK(hit.size() == 5);
  CHECK(std::is_sorted(hit.begin(), hit.end()));
}

}

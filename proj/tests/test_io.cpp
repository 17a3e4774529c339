#include "helpers.hpp"

#include "hf/io.hpp"

#include <doctest.h>

#include <filesystem>

using namespace hf;

TEST_SUITE("io") {

TEST_CASE("format_double round-trips") {
  for (double x : {0.0, 1.0, -2.5, kPi, 1e-300, 6.02214076e23, 0.1 + 0.2}) CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("csv") {
  const std::string text = to_csv({"a", "b"}, {{1.0, 2.0}, {0.1, -3e-8}});
  CHECK(text.rfind("a,b\n", 0) == 0);
  const CsvData d = parse_csv(text);
  REQUIRE(d.rows.size() == 2);
  CHECK(d.header == std::vector<std::string>{"a", "b"});
  CHECK(d.rows[1][0] == 0.1);
  CHECK(d.rows[1][1] == -3e-8);
  CHECK_THROWS_AS(to_csv({"a", "b"}, {{1.0}}), Error);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), Error);
}

TEST_CASE("container checks") {
  const nlohmann::json c = make_container("multigraph", {{"x", 1}});
  CHECK(c["schema"] == kSchemaVersion);
  CHECK_NOTHROW(check_container(c, "multigraph"));
  CHECK_THROWS_AS(check_container(c, "mesh"), Error);
  nlohmann::json bad = c;
  bad["schema"] = "hf-0";
  CHECK_THROWS_AS(check_container(bad, "multigraph"), Error);
}

TEST_CASE("grid round trip keeps spacing and truncation") {
  const PolarGrid g(PolarRect{1.5, kInfinity, -kPi, 3 * kPi}, 12, 40, RadialSpacing::uniform, 80.0);
  const PolarGrid h = grid_from_json(grid_to_json(g));
  CHECK(h.n_rho() == g.n_rho());
  CHECK(h.n_theta() == g.n_theta());
  CHECK(h.spacing() == g.spacing());
  CHECK(h.truncated());
  for (int i = 0; i < g.n_rho(); ++i) CHECK(h.rho(i) == g.rho(i));
}

TEST_CASE("graph round trip re-attaches closed forms") {
  const PolarGrid g(PolarRect{1, 4, -2 * kPi, 2 * kPi}, 10, 64);
  MultiGraph u = test::helicoid(g, 1.7);
  u.center = Vec3(0.5, -1, 2);
  u.frame = rotation_from_vector(Vec3(0.1, 0.2, 0.3));
  const MultiGraph v = graph_from_json(graph_to_json(u));
  CHECK(v.values == u.values);
  CHECK(v.center == u.center);
  CHECK(v.frame == u.frame);
  CHECK(v.has_analytic());
  CHECK(v.analytic->eval(2.0, 0.3).u_t == doctest::Approx(1.7));

  const MultiGraph s = graph_from_json(graph_to_json(test::sampled(u)));
  CHECK_FALSE(s.has_analytic());
  CHECK(s.values == u.values);
  CHECK(dump(graph_to_json(s)) == dump(graph_to_json(test::sampled(u))));
}

TEST_CASE("mesh round trip") {
  const MeshPatch m = helicoid_ball_mesh(HelicoidModel{}, 2.0, 11, 17);
  const MeshPatch n = mesh_from_json(mesh_to_json(m));
  CHECK(n.vertices == m.vertices);
  CHECK(n.triangles == m.triangles);
  CHECK(n.normals == m.normals);
  CHECK(n.A2 == m.A2);
}

TEST_CASE("files") {
  const auto dir = std::filesystem::temp_directory_path() / "hf_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "x.json";
  write_text_file(path, dump(make_container("mesh", {})));
  CHECK(read_json_file(path)["type"] == "mesh");
  CHECK_THROWS_AS(read_json_file(dir / "missing.json"), Error);
  write_text_file(path, "{not json");
  CHECK_THROWS_AS(read_json_file(path), Error);
  std::filesystem::remove_all(dir);
}

}

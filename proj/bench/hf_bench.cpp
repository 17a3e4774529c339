#include "hf/asymptotics.hpp"
#include "hf/exact_surfaces.hpp"
#include "hf/gauss.hpp"
#include "hf/helicoid_fit.hpp"
#include "hf/mse_solver.hpp"
#include "hf/sheet_analysis.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>

using namespace hf;

namespace {

double best_of(int repeat, const std::function<void()>& f) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < repeat; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

struct Kernel {
  std::string name;
  std::function<void(Exec)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Serial vs parallel kernel timings");
  int repeat = 3, n = 128;
  app.add_option("--repeat", repeat, "runs per kernel (best is reported)")->check(CLI::PositiveNumber);
  app.add_option("--n", n, "grid size per direction")->check(CLI::Range(16, 2048));
  CLI11_PARSE(app, argc, argv);

  const PolarGrid grid = PolarGrid::per_turn(PolarRect{1, 16, -3 * kPi, 3 * kPi}, n, n);
  const MultiGraph u = MultiGraph::from_function(grid, [](double r, double t) { return PolarJet{t + 0.3 * std::sin(2 * t) / r}; });
  const MeshPatch mesh = helicoid_ball_mesh(HelicoidModel{}, 6.0, n, 2 * n);
  std::vector<double> nu(mesh.vertices.size());
  for (std::size_t v = 0; v < nu.size(); ++v) nu[v] = 0.01 * std::sin(mesh.vertices[v].x() + 0.5 * mesh.vertices[v].z());
  const std::vector<double> levels{-4.5, -2.0, -0.3, 1.1, 3.7};
  const CurveSamples curve = weierstrass_curve({0.25, 1.0}, -10, 10, 4096);
  const PolarGrid small(PolarRect{1, 4, 0, kTwoPi}, n / 2, n / 2);
  const DirichletData bc = boundary_from_function(small, [](double, double t) { return t; });

  const std::vector<Kernel> kernels{
      {"derivatives", [&](Exec e) { derivatives(u, DerivativeSource::automatic, e); }},
      {"mse_residual", [&](Exec e) { mse_residual(u, DerivativeSource::automatic, e); }},
      {"discrete_residual", [&](Exec e) { discrete_residual(u, e); }},
      {"gauss_from_graph", [&](Exec e) { gauss_from_graph(u, e); }},
      {"complex_gradient", [&](Exec e) { complex_gradient(u, e); }},
      {"solve_dirichlet", [&](Exec e) {
         SolveConfig c;
         c.exec = e;
         solve_dirichlet(small, bc, c);
       }},
      {"quadric_curvature", [&](Exec e) { quadric_curvature(mesh, e); }},
      {"detect_blowup_pairs", [&](Exec e) {
         BlowUpOptions o;
         o.exec = e;
         detect_blowup_pairs(mesh, std::sqrt(2.0), o);
       }},
      {"trace_level_sets", [&](Exec e) { trace_level_sets(mesh, levels, e); }},
      {"phi_distortion", [&](Exec e) { phi_distortion(normal_graph_from_offsets(mesh, nu, e), e); }},
      {"embeddedness_verdict", [&](Exec e) { embeddedness_verdict(curve, 1e-9, e); }},
  };

  std::printf("threads=%d repeat=%d n=%d\n", max_threads(), repeat, n);
  std::printf("%-22s %12s %12s %8s\n", "kernel", "serial_s", "parallel_s", "speedup");
  for (const Kernel& k : kernels) {
    const double s = best_of(repeat, [&] { k.run(Exec::serial); });
    const double p = best_of(repeat, [&] { k.run(Exec::parallel); });
    std::printf("%-22s %12.6f %12.6f %8.2f\n", k.name.c_str(), s, p, s / p);
  }
  return 0;
}

#include "helpers.hpp"

#include "hf/asymptotics.hpp"
#include "hf/mse_solver.hpp"

#include <doctest.h>

using namespace hf;

namespace {

PolarGrid three_half_turns(double r1, double r2, int n_rho, int per_turn) {
  return PolarGrid::per_turn(PolarRect{r1, r2, -3 * kPi, 3 * kPi}, n_rho, per_turn);
}

MultiGraph wobble(const PolarGrid& g) {
  return test::analytic(g, [](double r, double t) {
    const double q = std::pow(r, -0.25);
    return PolarJet{t + q * std::sin(t), -0.25 * q / r * std::sin(t), 1 + q * std::cos(t), 0.3125 * q / (r * r) * std::sin(t),
                    -0.25 * q / r * std::cos(t), -q * std::sin(t)};
  });
}

MultiGraph perturbed_helicoid() {
  const PolarGrid g = three_half_turns(1, 8, 40, 64);
  const double r2 = g.rect().r2;
  const SolveReport r = perturb_and_solve(test::helicoid(g), [r2](double rho, double t) { return rho > r2 - 1e-9 ? 0.05 * std::sin(t) : 0.0; });
  REQUIRE(r.converged);
  return r.solution;
}

}  // namespace

TEST_SUITE("asymptotics") {

TEST_CASE("complex_gradient examples") {
  const PolarGrid g(PolarRect{1, 4, -kPi, kPi}, 31, 65, RadialSpacing::uniform);
  for (const Complex& f : complex_gradient(MultiGraph(g, std::vector<double>(g.size(), 0.0)))) CHECK(std::abs(f) == 0.0);
  const std::vector<Complex> h = complex_gradient(test::helicoid(g));
  const long k = g.index(10, 32);  // rho = 2, theta = 0
  CHECK(g.theta(32) == doctest::Approx(0.0));
  CHECK(std::abs(h[k] - Complex(0, -0.5)) <= 1e-12);
  for (int i = 0; i < g.n_rho(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const Complex zeta = std::polar(g.rho(i), g.theta(j));
      CHECK(std::abs(h[g.index(i, j)] - Complex(0, -1) / zeta) <= 1e-12);
    }
  for (const Complex& f : complex_gradient(test::tilted_plane(g, 1.0))) CHECK(std::abs(f - 1.0) <= 1e-12);
}

TEST_CASE("laurent_fit examples") {
  const PolarGrid g = PolarGrid::per_turn(PolarRect{1, 32, -kPi, kPi}, 64, 256);
  const std::vector<double> radii{4, 8, 16, 32};
  SUBCASE("helicoid family: c = -i a") {
    for (double a : {0.5, 1.0, 2.0}) {
      const LaurentFit f = laurent_fit(test::helicoid(g, a), 2.0, radii);
      CHECK(std::abs(f.c - Complex(0, -a)) <= 1e-6);
      for (double r : f.remainder_sup) CHECK(r <= 1e-8);
      CHECK(f.rho0 == 4.0);
      const LaurentFit f4 = laurent_fit(test::helicoid(g, a), 2.0, radii, LaurentOptions{1.0, 0.0, 512, 8.0});
      CHECK(std::abs(f4.c - f.c) <= 1e-6);
    }
  }
  SUBCASE("sampled helicoid") {
    const LaurentFit f = laurent_fit(test::sampled(test::helicoid(g)), 2.0, radii);
    CHECK(std::abs(f.c - Complex(0, -1)) <= 1e-6);
  }
  SUBCASE("tilted plane") {
    const LaurentFit f = laurent_fit(test::tilted_plane(g, 1.0), 2.0, radii);
    CHECK(std::abs(f.c) <= 1e-10);
    for (double r : f.remainder_sup) CHECK(r == doctest::Approx(1.0));
  }
  SUBCASE("zero") {
    const LaurentFit f = laurent_fit(MultiGraph(g, std::vector<double>(g.size(), 0.0)), 2.0, radii);
    CHECK(std::abs(f.c) == 0.0);
    for (double r : f.remainder_sup) CHECK(r == 0.0);
  }
  SUBCASE("radii outside the domain") {
    CHECK_THROWS_AS(laurent_fit(test::helicoid(g), 2.0, {4, 64}), Error);
    CHECK_THROWS_AS(laurent_fit(test::helicoid(g), 20.0, radii), Error);
  }
}

TEST_CASE("broken_circle_osc examples") {
  const PolarGrid g = PolarGrid::per_turn(PolarRect{1, 80, -kPi, kPi}, 96, 256);
  SUBCASE("helicoid") {
    const OscReport r = broken_circle_osc(test::helicoid(g, 1.5), 3.0);
    CHECK(r.osc <= 1e-12);
    CHECK(r.min_u_theta == doctest::Approx(1.5));
    CHECK(r.w_abs == doctest::Approx(1.5 * kTwoPi));
  }
  SUBCASE("synthetic wobble, closed form") {
    for (double rho : {4.0, 16.0, 64.0}) {
      const OscReport r = broken_circle_osc(wobble(g), rho);
      CHECK(r.osc == doctest::Approx(2 * std::pow(rho, -0.25)).epsilon(1e-3));
      CHECK(r.rho_quarter == doctest::Approx(std::pow(rho, -0.25)));
    }
    CHECK(broken_circle_osc(wobble(g), 16.0).osc == doctest::Approx(1.0).epsilon(1e-3));
  }
  SUBCASE("synthetic wobble, sampled") {
    for (double rho : {4.0, 16.0, 64.0}) {
      const OscReport r = broken_circle_osc(test::sampled(wobble(g)), rho);
      CHECK(r.osc == doctest::Approx(2 * std::pow(rho, -0.25)).epsilon(1e-3));
      // Richardson-style check at double the sampling
      CHECK(broken_circle_osc(test::sampled(wobble(g)), rho, 1024).osc == doctest::Approx(r.osc).epsilon(1e-4));
    }
  }
  SUBCASE("outside the domain") {
    CHECK_THROWS_AS(broken_circle_osc(test::helicoid(g), 100.0), Error);
    CHECK_THROWS_AS(broken_circle_osc(test::helicoid(PolarGrid(PolarRect{1, 4, 0, kTwoPi}, 8, 32)), 2.0), Error);
  }
}

TEST_CASE("circle integral of u_theta is the separation at -pi") {
  const PolarGrid g = PolarGrid::per_turn(PolarRect{1, 16, -kPi, kPi}, 48, 128);
  for (const MultiGraph& u : {wobble(g), test::sampled(wobble(g)), test::helicoid(g, 0.7)}) {
    for (double rho : {1.5, 3.0, 10.0}) {
      const CircleSampler c(u, rho);
      CHECK(std::abs(c.integrate_u_theta(-kPi, kPi) - separation_at_minus_pi(u, rho)) <= 1e-8);
    }
  }
}

TEST_CASE("spiral_threshold examples") {
  const PolarGrid g = three_half_turns(1, 20, 32, 64);
  SUBCASE("helicoid") {
    const SpiralReport r = spiral_threshold(test::helicoid(g), kTwoPi, 0.01);
    CHECK(r.C3 == doctest::Approx(g.rho(0)));
    for (std::size_t k = 0; k < r.radii.size(); ++k) {
      CHECK(r.min_u_theta[k] == doctest::Approx(1.0));
      CHECK(r.rhs[k] == doctest::Approx(0.25 * std::pow(r.radii[k], -0.01)));
    }
  }
  SUBCASE("reversed spiral never qualifies") {
    const SpiralReport r = spiral_threshold(test::helicoid(g, -1.0), kTwoPi, 0.01);
    CHECK(std::isinf(r.C3));
  }
  SUBCASE("domain must hold three half-turns") {
    CHECK_THROWS_AS(spiral_threshold(test::helicoid(PolarGrid::per_turn(PolarRect{1, 4, -2 * kPi, 2 * kPi}, 8, 32)), kTwoPi, 0.01), Error);
  }
}

TEST_CASE("solver-perturbed helicoid") {
  const MultiGraph u = perturbed_helicoid();
  for (int i = 1; i < u.grid.n_rho() - 1; i += 4) {
    const double rho = u.grid.rho(i);
    const OscReport r = broken_circle_osc(u, rho);
    CHECK(r.within(100.0, 0.1));
    CHECK(std::abs(CircleSampler(u, rho).integrate_u_theta(-kPi, kPi) - separation_at_minus_pi(u, rho)) <= 1e-8);
  }
  CHECK(broken_circle_osc(u, u.grid.rho(u.grid.n_rho() - 2)).osc > 0.0);
  const SpiralReport s = spiral_threshold(u, 2.0, 0.1);
  REQUIRE(std::isfinite(s.C3));
  for (std::size_t k = 0; k < s.radii.size(); ++k)
    if (s.radii[k] >= s.C3) {
      CHECK(s.min_u_theta[k] >= s.rhs[k]);
      CHECK(s.min_u_theta[k] > 0.0);
    }
}

}

#include "helpers.hpp"

#include "hf/mse_solver.hpp"

#include <doctest.h>

using namespace hf;

namespace {

double sup_error(const MultiGraph& u, const GraphFunction& f) {
  double e = 0.0;
  for (int i = 0; i < u.grid.n_rho(); ++i)
    for (int j = 0; j < u.grid.n_theta(); ++j) e = std::max(e, std::abs(u.at(i, j) - f(u.grid.rho(i), u.grid.theta(j)).u));
  return e;
}

void check_max_principle(const SolveReport& r) {
  const MultiGraph& u = r.solution;
  const PolarGrid& g = u.grid;
  double bmin = kInfinity, bmax = -kInfinity, imin = kInfinity, imax = -kInfinity;
  for (int i = 0; i < g.n_rho(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const bool edge = i == 0 || j == 0 || i == g.n_rho() - 1 || j == g.n_theta() - 1;
      const double x = u.at(i, j);
      (edge ? bmin : imin) = std::min(edge ? bmin : imin, x);
      (edge ? bmax : imax) = std::max(edge ? bmax : imax, x);
    }
  CHECK(imin >= bmin - 1e-12);
  CHECK(imax <= bmax + 1e-12);
  CHECK(r.max_principle_ok);
}

const GraphFunction theta_fn = [](double, double t) { return PolarJet{t, 0, 1}; };

}  // namespace

TEST_SUITE("mse_solver") {

TEST_CASE("mse_residual examples") {
  const PolarGrid g(PolarRect{1, 2, 0, kTwoPi}, 17, 64);
  CHECK(test::sup_abs(mse_residual(MultiGraph(g, std::vector<double>(g.size(), 0.0)))) == 0.0);
  CHECK(test::sup_abs(mse_residual(test::helicoid(g, 1.3))) <= 1e-10);
  CHECK(test::sup_abs(mse_residual(test::sampled(test::helicoid(g, 1.3)))) <= 1e-8);
  const MultiGraph sq = test::analytic(g, [](double r, double) { return PolarJet{r * r, 2 * r, 0, 2, 0, 0}; }, "square");
  for (double x : mse_residual(sq)) CHECK(x > 0.0);
  for (double x : mse_residual(test::sampled(sq))) CHECK(x > 0.0);
}

TEST_CASE("configuration and boundary validation") {
  SolveConfig c;
  c.residual_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = SolveConfig{};
  c.max_newton_iters = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = SolveConfig{};
  c.initial_guess = InitialGuess::given;
  CHECK_THROWS_AS(c.validate(), Error);

  const PolarGrid g(PolarRect{1, 2, 0, kTwoPi}, 8, 16);
  DirichletData d = boundary_from_function(g, [](double, double t) { return t; });
  CHECK_NOTHROW(d.validate(g));
  d.rho_max[3] = std::nan("");
  CHECK_THROWS_AS(d.validate(g), Error);
  d = boundary_from_function(g, [](double, double t) { return t; });
  d.rho_min.pop_back();
  CHECK_THROWS_AS(d.validate(g), Error);
}

TEST_CASE("zero boundary gives the zero solution in one iteration") {
  const PolarGrid g(PolarRect{1, 4, 0, kTwoPi}, 16, 32);
  const SolveReport r = solve_dirichlet(g, boundary_from_function(g, [](double, double) { return 0.0; }));
  CHECK(r.converged);
  CHECK(r.iterations <= 1);
  CHECK(test::sup_abs(r.solution.values) == 0.0);
}

TEST_CASE("helicoid boundary: second-order convergence") {
  std::vector<double> err;
  for (int n : {16, 32, 64}) {
    const PolarGrid g(PolarRect{1, 4, 0, kTwoPi}, n, n);
    const SolveReport r = solve_dirichlet(g, boundary_from_function(g, [](double, double t) { return t; }));
    REQUIRE(r.converged);
    CHECK(r.residual <= 1e-10);
    check_max_principle(r);
    for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k] < r.history[k - 1]);
    err.push_back(sup_error(r.solution, theta_fn));
  }
  CHECK(err.back() <= 5e-3);
  for (std::size_t k = 1; k < err.size(); ++k) {
    INFO("ratio " << err[k - 1] / err[k]);
    CHECK(err[k - 1] / err[k] >= 3.0);
    CHECK(err[k - 1] / err[k] <= 5.0);
  }
}

TEST_CASE("catenoid radial problem") {
  const PolarGrid g(PolarRect{1.5, 4, 0, kPi / 4}, 128, 8);
  const SolveReport r = solve_dirichlet(g, boundary_from_function(g, [](double rho, double) { return std::acosh(rho); }));
  REQUIRE(r.converged);
  check_max_principle(r);
  CHECK(sup_error(r.solution, [](double rho, double) { return PolarJet{std::acosh(rho)}; }) <= 5e-3);
}

TEST_CASE("multivalued domains are not identified") {
  const PolarGrid g(PolarRect{1, 3, -2 * kPi, 2 * kPi}, 16, 64);
  const SolveReport r = solve_dirichlet(g, boundary_from_function(g, [](double, double t) { return t; }));
  REQUIRE(r.converged);
  CHECK(sup_error(r.solution, theta_fn) <= 2e-2);
  for (double w : separation(r.solution).w) CHECK(w > 0.0);
}

TEST_CASE("initial guesses agree") {
  const PolarGrid g(PolarRect{1, 3, 0, kTwoPi}, 16, 24);
  const DirichletData d = boundary_from_function(g, [](double r, double t) { return t + 0.1 * r; });
  SolveConfig a, b, c;
  a.initial_guess = InitialGuess::zero;
  b.initial_guess = InitialGuess::harmonic_extension;
  c.initial_guess = InitialGuess::given;
  c.given = test::helicoid(g);
  const SolveReport ra = solve_dirichlet(g, d, a), rb = solve_dirichlet(g, d, b), rc = solve_dirichlet(g, d, c);
  REQUIRE((ra.converged && rb.converged && rc.converged));
  for (long k = 0; k < g.size(); ++k) {
    CHECK(std::abs(ra.solution.values[k] - rb.solution.values[k]) < 1e-9);
    CHECK(std::abs(ra.solution.values[k] - rc.solution.values[k]) < 1e-9);
  }
  // undamped Newton from a poor start: whatever happens, the flag is honest
  c.damping = Damping::none;
  const SolveReport rn = solve_dirichlet(g, d, c);
  if (rn.converged) CHECK(rn.residual <= c.residual_tol);
  else CHECK(rn.residual > c.residual_tol);
}

TEST_CASE("discrete residual of the solution is below tolerance") {
  const PolarGrid g(PolarRect{1, 3, 0, kTwoPi}, 16, 24);
  const SolveReport r = solve_dirichlet(g, boundary_from_function(g, [](double, double t) { return 0.5 * t; }));
  REQUIRE(r.converged);
  CHECK(test::sup_abs(discrete_residual(r.solution)) <= r.residual * (1 + 1e-12));
  CHECK(r.solution.solver_residual.has_value());
}

TEST_CASE("perturb_and_solve examples") {
  const PolarGrid g(PolarRect{1, 4, -2 * kPi, 2 * kPi}, 24, 96);
  const MultiGraph base = test::helicoid(g);
  const double r2 = g.rect().r2;
  SUBCASE("zero bump returns the base") {
    const SolveReport r = perturb_and_solve(base, [](double, double) { return 0.0; });
    REQUIRE(r.converged);
    // the base solves the continuum equation, not the discrete one
    CHECK(sup_error(r.solution, theta_fn) <= 2e-2);
  }
  SUBCASE("small outer bump stays embedded") {
    const BoundaryBump bump = [r2](double rho, double t) { return rho > r2 - 1e-9 ? 0.05 * std::sin(t) : 0.0; };
    CHECK(bump_sup(g, bump) == doctest::Approx(0.05).epsilon(1e-2));
    const SolveReport r = perturb_and_solve(base, bump);
    REQUIRE(r.converged);
    check_max_principle(r);
    const Separation s = separation(r.solution);
    CHECK(s.sign == 1);
    for (double w : s.w) CHECK(w > 0.0);
    CHECK(r.warnings.empty());
  }
  SUBCASE("large bump is reported") {
    const BoundaryBump bump = [r2](double rho, double t) { return rho > r2 - 1e-9 ? 10.0 * std::sin(3 * t) : 0.0; };
    const SolveReport r = perturb_and_solve(base, bump);
    CHECK_FALSE(r.warnings.empty());
    if (!r.converged) CHECK_FALSE(r.message.empty());
    else CHECK(r.residual <= 1e-10);
  }
}

}

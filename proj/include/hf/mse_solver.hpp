#pragma once

#include "hf/geometry.hpp"

#include <optional>
#include <string>

namespace hf {

/// Pointwise div(grad u / sqrt(1 + |grad u|^2)) per node, from derivatives()
/// (analytic when attached, finite differences otherwise).
std::vector<double> mse_residual(const MultiGraph& u, DerivativeSource src = DerivativeSource::automatic,
                                 Exec exec = Exec::parallel);

/// Dirichlet data on the four grid edges. rho_min / rho_max hold n_theta
/// values (the inner / outer circle arcs), theta_min / theta_max hold n_rho
/// values (the two radial edges). Corner values must agree.
struct DirichletData {
  std::vector<double> rho_min;
  std::vector<double> rho_max;
  std::vector<double> theta_min;
  std::vector<double> theta_max;

  void validate(const PolarGrid& grid) const;
};

DirichletData boundary_of(const MultiGraph& u);
DirichletData boundary_from_function(const PolarGrid& grid, const std::function<double(double, double)>& f);

enum class Damping { none, line_search };
enum class InitialGuess { zero, harmonic_extension, given };

struct SolveConfig {
  int max_newton_iters = 50;
  double residual_tol = 1e-10;
  Damping damping = Damping::line_search;
  InitialGuess initial_guess = InitialGuess::harmonic_extension;
  std::optional<MultiGraph> given;  // used with InitialGuess::given
  int max_halvings = 20;
  Exec exec = Exec::parallel;

  void validate() const;
};

struct SolveReport {
  int iterations = 0;
  double residual = kInfinity;  // sup-norm of the mass-normalized discrete residual
  bool converged = false;
  MultiGraph solution;
  std::vector<double> history;  // residual sup-norm per iteration
  bool max_principle_ok = true;
  std::string message;
  std::vector<std::string> warnings;
};

/// Damped Newton on the P1 finite-element discretization of the area
/// functional over the triangulated polar grid (grid_triangles). Unknowns are
/// the interior nodes; sheets of a multivalued domain are never identified.
/// Divergence (5 consecutive residual increases) returns a non-converged
/// report; a singular Newton system throws.
SolveReport solve_dirichlet(const PolarGrid& grid, const DirichletData& boundary, const SolveConfig& cfg = {});

/// Mass-normalized discrete residual of the solver's equation at every node
/// (zero on the boundary).
std::vector<double> discrete_residual(const MultiGraph& u, Exec exec = Exec::parallel);

/// Boundary bump added to the base boundary values.
using BoundaryBump = std::function<double(double rho, double theta)>;

/// Solve with boundary = base boundary + bump, starting from the base. A bump
/// larger than 0.2 x the base boundary oscillation is reported as a warning.
SolveReport perturb_and_solve(const MultiGraph& base, const BoundaryBump& bump, SolveConfig cfg = {});

/// Sup of bump over the boundary nodes of a grid.
double bump_sup(const PolarGrid& grid, const BoundaryBump& bump);

}  // namespace hf

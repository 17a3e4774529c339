#pragma once

#include "hf/geometry.hpp"

namespace hf {

/// f = u_x - i u_y at every node.
std::vector<Complex> complex_gradient(const MultiGraph& u, Exec exec = Exec::parallel);

/// Values and first derivatives of u along a circle of radius rho.
/// With analytic data attached the closed form is used. Otherwise the grid
/// is interpolated by cubic Lagrange in the radial coordinate s, then by a C1
/// cubic Hermite spline in theta whose slopes are second-order differences.
/// u_theta is the exact theta-derivative of that spline, so its integral over
/// any arc equals the difference of the sampled values.
class CircleSampler {
 public:
  CircleSampler(const MultiGraph& u, double rho);

  double rho() const { return rho_; }
  PolarJet jet(double theta) const;  // u, u_r, u_t (second derivatives left at 0)
  double value(double theta) const { return jet(theta).u; }
  double u_theta(double theta) const { return jet(theta).u_t; }
  /// Integral of u_theta over [a, b], exact for the spline (two-point Gauss
  /// per spline piece), composite Gauss-Legendre for analytic data.
  double integrate_u_theta(double a, double b) const;

 private:
  const MultiGraph* u_;
  double rho_;
  std::vector<double> U_, Ut_, R_, Rt_;  // column values / slopes for u and u_rho
};

/// Broken circle C(rho) = {rho} x [-pi, pi] sampled at n + 1 points
/// theta_k = -pi + 2 pi k / n.
std::vector<double> broken_circle_angles(int n);

struct OscReport {
  double rho = 0.0;
  double osc = 0.0;          // max - min of u_theta over C(rho)
  double min_u_theta = 0.0;
  double max_u_theta = 0.0;
  double rho_quarter = 0.0;  // rho^(-1/4)
  double w_abs = 0.0;        // |w(rho, -pi)|
  int samples = 0;
  /// osc <= C (rho^(-1/4) + eps |w(rho, -pi)|)
  bool within(double C, double eps) const { return osc <= C * (rho_quarter + eps * w_abs); }
};

/// Throws when C(rho) is not inside the domain.
OscReport broken_circle_osc(const MultiGraph& u, double rho, int samples = 512);

/// w(rho, -pi) = u(rho, pi) - u(rho, -pi) from the circle sampler.
double separation_at_minus_pi(const MultiGraph& u, double rho);

struct LaurentOptions {
  double C0 = 1.0;
  double epsilon = 0.0;
  int samples = 512;
  double rho0 = 0.0;  // extraction radius; 0 means 2 r1
};

struct LaurentFit {
  double r1 = 0.0;
  double rho0 = 0.0;
  Complex c{0.0, 0.0};
  double closure_defect = 0.0;  // |f zeta (pi) - f zeta (-pi)| at rho0
  std::vector<double> radii;
  std::vector<double> remainder_sup;  // sup over C(rho) of |f - c / zeta|
  std::vector<double> bound_rhs;      // C0 r1^(-1/4) / rho + C0 eps |w(r1, -pi)| / r1
  double w_r1 = 0.0;
  double C0 = 1.0;
  double epsilon = 0.0;
  double fitted_C0 = 0.0;  // smallest C0 for which every remainder meets the bound
};

/// c = (1 / 2 pi i) contour integral of f dzeta over the broken circle at
/// rho0, by the trapezoid rule; remainder tabulated per radius. Throws when
/// [rho0, max radius] x [-pi, pi] or r1 leaves the domain.
LaurentFit laurent_fit(const MultiGraph& u, double r1, std::vector<double> radii,
                       const LaurentOptions& opt = {}, Exec exec = Exec::parallel);

struct SpiralReport {
  double C2 = 0.0;
  double epsilon = 0.0;
  double C3 = kInfinity;  // infinity when the bound never holds to the end of the table
  std::vector<double> radii;
  std::vector<double> min_u_theta;
  std::vector<double> rhs;  // (C2 / 8 pi) rho^(-eps)
  double w_inner_min = 0.0;  // min over theta of w at the innermost radius (context for C2)
};

/// Needs theta in [-3 pi, 3 pi]. The table runs over the grid radii.
SpiralReport spiral_threshold(const MultiGraph& u, double C2, double epsilon, int samples = 512,
                              Exec exec = Exec::parallel);

}  // namespace hf

#include "hf/asymptotics.hpp"

#include <algorithm>
#include <sstream>

namespace hf {

namespace {

// Second-order slope of equally spaced samples.
double slope(const std::vector<double>& v, int j, double h) {
  const int n = static_cast<int>(v.size());
  if (j == 0) return (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
  if (j == n - 1) return (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
  return (v[j + 1] - v[j - 1]) / (2.0 * h);
}

std::vector<double> slopes(const std::vector<double>& v, double h) {
  std::vector<double> m(v.size());
  for (int j = 0; j < static_cast<int>(v.size()); ++j) m[j] = slope(v, j, h);
  return m;
}

void require_circle(const MultiGraph& u, double rho, const char* who) {
  const PolarRect& r = u.grid.rect();
  const double slack = 1e-9;
  if (!(rho >= r.r1 * (1.0 - 1e-12) && rho <= r.r2 * (1.0 + 1e-12)) || r.theta1 > -kPi + slack ||
      r.theta2 < kPi - slack) {
    std::ostringstream os;
    os << who << ": circle rho = " << rho << " x [-pi, pi] is outside the domain [" << r.r1 << ", "
       << r.r2 << "] x [" << r.theta1 << ", " << r.theta2 << "]";
    throw Error(os.str());
  }
}

constexpr double kGauss5x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                0.9061798459386640};
constexpr double kGauss5w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                0.4786286704993665, 0.2369268850561891};

}  // namespace

std::vector<Complex> complex_gradient(const MultiGraph& u, Exec exec) {
  const Derivatives d = derivatives(u, DerivativeSource::automatic, exec);
  std::vector<Complex> f(u.grid.size());
  for_each_index(u.grid.size(), exec, [&](long k) { f[k] = Complex(d.grad[k].x(), -d.grad[k].y()); });
  return f;
}

CircleSampler::CircleSampler(const MultiGraph& u, double rho) : u_(&u), rho_(rho) {
  const PolarGrid& g = u.grid;
  const PolarRect& r = g.rect();
  if (!(rho >= r.r1 * (1.0 - 1e-12) && rho <= r.r2 * (1.0 + 1e-12))) {
    std::ostringstream os;
    os << "CircleSampler: rho = " << rho << " outside [" << r.r1 << ", " << r.r2 << "]";
    throw Error(os.str());
  }
  if (u.analytic) return;
  const int nr = g.n_rho(), nt = g.n_theta();
  const double x = std::clamp(g.radial_position(rho), 0.0, nr - 1.0);
  const int i0 = std::clamp(static_cast<int>(std::floor(x)) - 1, 0, nr - 4);
  const double t = x - i0;
  double L[4], dL[4];
  for (int a = 0; a < 4; ++a) {
    double w = 1.0, dw = 0.0;
    for (int b = 0; b < 4; ++b) {
      if (b == a) continue;
      const double f = (t - b) / static_cast<double>(a - b);
      dw = dw * f + w / static_cast<double>(a - b);
      w *= f;
    }
    L[a] = w;
    dL[a] = dw;
  }
  const double ds = g.h_s() * g.drho_ds(rho);
  U_.resize(nt);
  R_.resize(nt);
  for (int j = 0; j < nt; ++j) {
    double v = 0.0, dv = 0.0;
    for (int a = 0; a < 4; ++a) {
      v += L[a] * u.at(i0 + a, j);
      dv += dL[a] * u.at(i0 + a, j);
    }
    U_[j] = v;
    R_[j] = dv / ds;
  }
  Ut_ = slopes(U_, g.h_theta());
  Rt_ = slopes(R_, g.h_theta());
}

PolarJet CircleSampler::jet(double theta) const {
  if (u_->analytic) return u_->analytic->eval(rho_, theta);
  const PolarGrid& g = u_->grid;
  const double y = g.angular_position(theta);
  if (y < -1e-9 || y > g.n_theta() - 1 + 1e-9) throw Error("CircleSampler: theta outside the domain");
  const int j = std::clamp(static_cast<int>(std::floor(y)), 0, g.n_theta() - 2);
  const double s = std::clamp(y - j, 0.0, 1.0), h = g.h_theta();
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1, d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
  PolarJet out;
  out.u = h00 * U_[j] + h10 * h * Ut_[j] + h01 * U_[j + 1] + h11 * h * Ut_[j + 1];
  out.u_t = (d00 * U_[j] + d01 * U_[j + 1]) / h + d10 * Ut_[j] + d11 * Ut_[j + 1];
  out.u_r = h00 * R_[j] + h10 * h * Rt_[j] + h01 * R_[j + 1] + h11 * h * Rt_[j + 1];
  return out;
}

double CircleSampler::integrate_u_theta(double a, double b) const {
  if (!(b > a)) return 0.0;
  if (u_->analytic) {
    const int pieces = 512;
    const double h = (b - a) / pieces;
    double sum = 0.0;
    for (int p = 0; p < pieces; ++p) {
      const double mid = a + (p + 0.5) * h;
      for (int q = 0; q < 5; ++q) sum += kGauss5w[q] * 0.5 * h * u_theta(mid + 0.5 * h * kGauss5x[q]);
    }
    return sum;
  }
  // u_theta is quadratic on each spline piece: two-point Gauss is exact.
  const PolarGrid& g = u_->grid;
  const double gx = 1.0 / std::sqrt(3.0);
  double sum = 0.0;
  for (int j = 0; j + 1 < g.n_theta(); ++j) {
    const double lo = std::max(a, g.theta(j)), hi = std::min(b, g.theta(j + 1));
    if (!(hi > lo)) continue;
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    sum += half * (u_theta(mid - half * gx) + u_theta(mid + half * gx));
  }
  return sum;
}

std::vector<double> broken_circle_angles(int n) {
  if (n < 2) throw Error("broken circle needs at least 2 intervals");
  std::vector<double> t(n + 1);
  for (int k = 0; k <= n; ++k) t[k] = -kPi + kTwoPi * k / n;
  t[n] = kPi;
  return t;
}

double separation_at_minus_pi(const MultiGraph& u, double rho) {
  require_circle(u, rho, "separation_at_minus_pi");
  const CircleSampler c(u, rho);
  return c.value(kPi) - c.value(-kPi);
}

OscReport broken_circle_osc(const MultiGraph& u, double rho, int samples) {
  require_circle(u, rho, "broken_circle_osc");
  if (samples < 256) throw Error("broken_circle_osc: need at least 256 samples");
  const CircleSampler c(u, rho);
  OscReport r;
  r.rho = rho;
  r.samples = samples + 1;
  r.min_u_theta = kInfinity;
  r.max_u_theta = -kInfinity;
  for (double t : broken_circle_angles(samples)) {
    const double v = c.u_theta(t);
    r.min_u_theta = std::min(r.min_u_theta, v);
    r.max_u_theta = std::max(r.max_u_theta, v);
  }
  r.osc = r.max_u_theta - r.min_u_theta;
  r.rho_quarter = std::pow(rho, -0.25);
  r.w_abs = std::abs(c.value(kPi) - c.value(-kPi));
  return r;
}

LaurentFit laurent_fit(const MultiGraph& u, double r1, std::vector<double> radii, const LaurentOptions& opt,
                       Exec exec) {
  if (!(r1 > 0.0)) throw Error("laurent_fit: r1 must be positive");
  if (opt.samples < 16) throw Error("laurent_fit: need at least 16 samples");
  LaurentFit fit;
  fit.r1 = r1;
  fit.rho0 = opt.rho0 > 0.0 ? opt.rho0 : 2.0 * r1;
  fit.C0 = opt.C0;
  fit.epsilon = opt.epsilon;
  std::sort(radii.begin(), radii.end());
  require_circle(u, r1, "laurent_fit");
  require_circle(u, fit.rho0, "laurent_fit");
  for (double r : radii) require_circle(u, r, "laurent_fit");

  const std::vector<double> angles = broken_circle_angles(opt.samples);
  auto f_at = [](const PolarJet& j, double rho, double t) {
    const double c = std::cos(t), s = std::sin(t);
    const double ux = c * j.u_r - s * j.u_t / rho, uy = s * j.u_r + c * j.u_t / rho;
    return Complex(ux, -uy);
  };

  {
    const CircleSampler cs(u, fit.rho0);
    const int n = opt.samples;
    const double h = kTwoPi / n;
    std::vector<Complex> F(n + 1);
    for (int k = 0; k <= n; ++k) {
      const double t = angles[k];
      F[k] = f_at(cs.jet(t), fit.rho0, t) * std::polar(fit.rho0, t);
    }
    Complex sum = 0.5 * (F[0] + F[n]);
    for (int k = 1; k < n; ++k) sum += F[k];
    fit.c = sum * h / kTwoPi;
    fit.closure_defect = std::abs(F[n] - F[0]);
  }

  fit.w_r1 = separation_at_minus_pi(u, r1);
  fit.radii = radii;
  fit.remainder_sup.assign(radii.size(), 0.0);
  fit.bound_rhs.assign(radii.size(), 0.0);
  for_each_index(static_cast<long>(radii.size()), exec, [&](long k) {
    const double rho = radii[k];
    const CircleSampler cs(u, rho);
    double sup = 0.0;
    for (double t : angles) {
      const Complex zeta = std::polar(rho, t);
      sup = std::max(sup, std::abs(f_at(cs.jet(t), rho, t) - fit.c / zeta));
    }
    fit.remainder_sup[k] = sup;
  });
  const double shape_w = opt.epsilon * std::abs(fit.w_r1) / r1;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double shape = std::pow(r1, -0.25) / radii[k] + shape_w;
    fit.bound_rhs[k] = opt.C0 * shape;
    fit.fitted_C0 = std::max(fit.fitted_C0, shape > 0.0 ? fit.remainder_sup[k] / shape : kInfinity);
  }
  return fit;
}

SpiralReport spiral_threshold(const MultiGraph& u, double C2, double epsilon, int samples, Exec exec) {
  const PolarRect& r = u.grid.rect();
  if (r.theta1 > -3.0 * kPi + 1e-9 || r.theta2 < 3.0 * kPi - 1e-9)
    throw Error("spiral_threshold: needs a 3-valued domain covering theta in [-3 pi, 3 pi]");
  if (samples < 256) throw Error("spiral_threshold: need at least 256 samples");
  SpiralReport rep;
  rep.C2 = C2;
  rep.epsilon = epsilon;
  const PolarGrid& g = u.grid;
  const int nr = g.n_rho();
  rep.radii.resize(nr);
  rep.min_u_theta.resize(nr);
  rep.rhs.resize(nr);
  const std::vector<double> angles = broken_circle_angles(samples);
  for_each_index(nr, exec, [&](long i) {
    const double rho = g.rho(static_cast<int>(i));
    const CircleSampler cs(u, rho);
    double m = kInfinity;
    for (double t : angles) m = std::min(m, cs.u_theta(t));
    rep.radii[i] = rho;
    rep.min_u_theta[i] = m;
    rep.rhs[i] = C2 / (8.0 * kPi) * std::pow(rho, -epsilon);
  });
  for (int i = nr - 1; i >= 0; --i) {
    if (!(rep.min_u_theta[i] >= rep.rhs[i])) break;
    rep.C3 = rep.radii[i];
  }
  const Separation sep = separation(u);
  rep.w_inner_min = kInfinity;
  for (int j = 0; j < sep.grid->n_theta(); ++j) rep.w_inner_min = std::min(rep.w_inner_min, sep.w[j]);
  return rep;
}

}  // namespace hf

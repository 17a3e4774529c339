#include "hf/polar_grid.hpp"

#include <sstream>

namespace hf {

void PolarRect::validate() const {
  if (!(r1 > 0.0) || !std::isfinite(r1))
    throw Error("PolarRect: r1 must be positive and finite");
  if (!(r2 > r1)) throw Error("PolarRect: r2 must exceed r1");
  if (!(theta2 > theta1) || !std::isfinite(theta1) || !std::isfinite(theta2))
    throw Error("PolarRect: theta2 must exceed theta1");
}

bool PolarRect::contains(double rho, double theta, double slack) const {
  return rho >= r1 - slack && rho <= r2 + slack && theta >= theta1 - slack &&
         theta <= theta2 + slack;
}

PolarGrid::PolarGrid(PolarRect rect, int n_rho, int n_theta, RadialSpacing spacing,
                     double r_max)
    : rect_(rect), n_rho_(n_rho), n_theta_(n_theta), spacing_(spacing) {
  rect_.validate();
  if (n_rho < 4) throw Error("PolarGrid: n_rho must be >= 4");
  if (n_theta < 8) throw Error("PolarGrid: n_theta must be >= 8");
  if (!std::isfinite(rect_.r2)) {
    if (!(r_max > rect_.r1)) throw Error("PolarGrid: truncation radius must exceed r1");
    rect_.r2 = r_max;
    truncated_ = true;
  }
  build();
}

PolarGrid::PolarGrid(Unchecked, PolarRect rect, int n_rho, int n_theta,
                     RadialSpacing spacing, bool truncated)
    : rect_(rect), n_rho_(n_rho), n_theta_(n_theta), spacing_(spacing), truncated_(truncated) {
  build();
}

PolarGrid PolarGrid::per_turn(PolarRect rect, int n_rho, int nodes_per_turn,
                              RadialSpacing spacing) {
  rect.validate();
  const double intervals = (rect.theta2 - rect.theta1) / kTwoPi * nodes_per_turn;
  const double rounded = std::round(intervals);
  if (std::abs(intervals - rounded) > 1e-9 * std::max(1.0, intervals)) {
    std::ostringstream os;
    os << "PolarGrid::per_turn: angular span is not a whole number of steps at "
       << nodes_per_turn << " steps per turn";
    throw Error(os.str());
  }
  return PolarGrid(rect, n_rho, static_cast<int>(rounded) + 1, spacing);
}

void PolarGrid::build() {
  s0_ = s_of_rho(rect_.r1);
  const double s1 = s_of_rho(rect_.r2);
  h_s_ = n_rho_ > 1 ? (s1 - s0_) / (n_rho_ - 1) : 0.0;
  h_theta_ = n_theta_ > 1 ? (rect_.theta2 - rect_.theta1) / (n_theta_ - 1) : 0.0;
  rho_.resize(n_rho_);
  for (int i = 0; i < n_rho_; ++i) rho_[i] = rho_of_s(s0_ + i * h_s_);
  rho_.front() = rect_.r1;
  if (n_rho_ > 1) rho_.back() = rect_.r2;
}

double PolarGrid::s_of_rho(double rho) const {
  return spacing_ == RadialSpacing::geometric ? std::log(rho) : rho;
}

double PolarGrid::rho_of_s(double s) const {
  return spacing_ == RadialSpacing::geometric ? std::exp(s) : s;
}

double PolarGrid::drho_ds(double rho) const {
  return spacing_ == RadialSpacing::geometric ? rho : 1.0;
}

double PolarGrid::d2rho_ds2(double rho) const {
  return spacing_ == RadialSpacing::geometric ? rho : 0.0;
}

std::optional<int> PolarGrid::turn_shift() const {
  if (h_theta_ <= 0.0) return std::nullopt;
  const double k = kTwoPi / h_theta_;
  const double r = std::round(k);
  if (std::abs(k - r) > 1e-9 * k) return std::nullopt;
  return static_cast<int>(r);
}

PolarGrid PolarGrid::angular_window(int j0, int count) const {
  if (j0 < 0 || count < 1 || j0 + count > n_theta_)
    throw Error("PolarGrid::angular_window: window outside grid");
  PolarRect r = rect_;
  r.theta1 = theta(j0);
  r.theta2 = theta(j0 + count - 1);
  PolarGrid sub(Unchecked{}, r, n_rho_, count, spacing_, truncated_);
  sub.h_theta_ = h_theta_;
  sub.rho_ = rho_;
  sub.h_s_ = h_s_;
  sub.s0_ = s0_;
  return sub;
}

}  // namespace hf

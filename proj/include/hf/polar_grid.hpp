#pragma once

#include "hf/common.hpp"

#include <optional>

namespace hf {

/// Closed polar rectangle {r1 <= rho <= r2, theta1 <= theta <= theta2}.
/// r2 may be kInfinity; gridding truncates it at a configured radius.
struct PolarRect {
  double r1 = 1.0;
  double r2 = 2.0;
  double theta1 = 0.0;
  double theta2 = kTwoPi;

  void validate() const;
  bool contains(double rho, double theta, double slack = 0.0) const;
};

enum class RadialSpacing { geometric, uniform };

/// Tensor grid over a polar rectangle. Radial nodes are uniform in a
/// computational coordinate s: s = log(rho) for geometric spacing (h_rho/rho
/// constant), s = rho for uniform spacing. Angular nodes are uniform and are
/// never wrapped: a span beyond 2*pi describes a multivalued domain.
/// Node (i, j) has flat index i * n_theta + j.
class PolarGrid {
 public:
  static constexpr double kDefaultRmax = 1.0e3;

  PolarGrid(PolarRect rect, int n_rho, int n_theta,
            RadialSpacing spacing = RadialSpacing::geometric,
            double r_max = kDefaultRmax);

  /// Grid whose angular resolution is `nodes_per_turn` intervals per 2*pi
  /// turn; the span must hold a whole number of intervals at that step.
  static PolarGrid per_turn(PolarRect rect, int n_rho, int nodes_per_turn,
                            RadialSpacing spacing = RadialSpacing::geometric);

  const PolarRect& rect() const { return rect_; }
  int n_rho() const { return n_rho_; }
  int n_theta() const { return n_theta_; }
  long size() const { return static_cast<long>(n_rho_) * n_theta_; }
  RadialSpacing spacing() const { return spacing_; }
  bool truncated() const { return truncated_; }

  long index(int i, int j) const { return static_cast<long>(i) * n_theta_ + j; }
  int radial_index(long k) const { return static_cast<int>(k / n_theta_); }
  int angular_index(long k) const { return static_cast<int>(k % n_theta_); }

  double rho(int i) const { return rho_[i]; }
  double theta(int j) const { return rect_.theta1 + j * h_theta_; }
  double h_s() const { return h_s_; }
  double h_theta() const { return h_theta_; }

  /// Computational coordinate of radius rho and its derivatives.
  double s_of_rho(double rho) const;
  double rho_of_s(double s) const;
  double drho_ds(double rho) const;
  double d2rho_ds2(double rho) const;
  double s0() const { return s0_; }

  /// Number of angular steps equal to one full turn, when 2*pi is a whole
  /// multiple of h_theta (to 1e-9 relative).
  std::optional<int> turn_shift() const;

  /// Fractional radial / angular index of a point (may lie outside).
  double radial_position(double rho) const { return (s_of_rho(rho) - s0_) / h_s_; }
  double angular_position(double theta) const { return (theta - rect_.theta1) / h_theta_; }

  /// Sub-grid made of angular columns [j0, j0 + count). Used for the
  /// separation field, which lives on the overlap of two sheets. Minimum
  /// size checks are relaxed to count >= 1.
  PolarGrid angular_window(int j0, int count) const;

  double winding() const { return (rect_.theta2 - rect_.theta1) / kTwoPi; }

 private:
  struct Unchecked {};
  PolarGrid(Unchecked, PolarRect rect, int n_rho, int n_theta, RadialSpacing spacing,
            bool truncated);
  void build();

  PolarRect rect_;
  int n_rho_ = 0;
  int n_theta_ = 0;
  RadialSpacing spacing_ = RadialSpacing::geometric;
  bool truncated_ = false;
  double s0_ = 0.0;
  double h_s_ = 0.0;
  double h_theta_ = 0.0;
  std::vector<double> rho_;
};

}  // namespace hf

#pragma once

#include "hf/mse_solver.hpp"

#include <optional>
#include <string>

namespace hf {

/// Per-node flatness expression on the separation overlap:
///   |grad u| + rho |Hess u| + 4 rho |grad w| / |w| + rho^2 |Hess w| / |w|
/// with Frobenius norms for the Hessians.
struct FlatnessField {
  PolarGrid grid;  // the overlap grid (columns 0 .. count-1 of u's grid)
  std::vector<double> value;
  std::vector<double> grad_term;
  std::vector<double> hess_term;
  std::vector<double> wgrad_term;
  std::vector<double> whess_term;
  double sup = 0.0;
  long argmax = -1;
};

/// Throws when the overlap is empty or w vanishes (|w| <= 1e-14 x scale) at
/// any node; the error lists those nodes.
FlatnessField flatness_terms(const MultiGraph& u, Exec exec = Exec::parallel);

enum class SheetKind { weak, strong };
std::string to_string(SheetKind k);
SheetKind sheet_kind_from_string(const std::string& s);

struct CertifyOptions {
  /// Bound on the equation residual: the stored solver residual when the
  /// graph came from the solver, else sup |mse_residual|.
  double residual_tol = 1e-8;
  double normalization_exponent = -0.25;
  double normalization_limit = 1e-3;
  Exec exec = Exec::parallel;
};

/// Power-law fit |grad u|(rho, 0) ~ L + B rho^p over the outer half of the
/// certified radii.
struct DecayFit {
  bool valid = false;
  double L = 0.0;
  double B = 0.0;
  double p = 0.0;
  double rms = 0.0;
  int samples = 0;
};

struct SheetCertificate {
  SheetKind kind = SheetKind::weak;
  double epsilon = 0.0;
  double N = 0.0;
  double scale = 0.0;
  Vec3 center = Vec3::Zero();
  double r_max = 0.0;
  int nodes_checked = 0;

  std::string residual_source;
  double residual_sup = 0.0;
  double residual_bound = 0.0;
  bool residual_ok = false;

  double gradient_sup = 0.0;
  bool gradient_ok = false;

  double cone_sup = 0.0;  // sup |u| / rho; the cone holds iff <= epsilon
  bool cone_ok = false;

  bool embedded = false;  // w != 0 wherever defined
  int separation_sign = 0;

  std::optional<double> flatness_sup;
  std::optional<FlatnessField> flatness;
  bool flatness_ok = true;

  double gradient_at_rmax = 0.0;
  DecayFit decay;
  bool normalization_ok = true;

  double tilt = 0.0;  // angle between mean outer normal and e3 (reported only)

  bool verdict = false;
  double margin = 0.0;  // min over recorded checks of (bound - measured)
  std::vector<std::string> failures;
};

/// Weak: residual, |grad u| <= eps and Gamma_u in the cone complement at
/// every node of [scale, r2] x [-pi N, pi N], plus w != 0. Strong adds the
/// flatness sup and the normalization proxy, and requires eps < 1 / (2 pi).
/// Throws when the domain does not cover the required rectangle.
SheetCertificate certify_sheet(const MultiGraph& u, double epsilon, double N, SheetKind kind,
                               double scale, const CertifyOptions& opt = {});

/// Least-squares tangent plane of the outer annulus (rho >= median radius):
/// normalized mean of the graph normals, in the graph's own frame.
Vec3 asymptotic_normal(const MultiGraph& u, Exec exec = Exec::parallel);

/// Fit of L + B rho^p to samples by grid search in p over [-3, 0) in steps
/// of 0.01 and linear least squares in (L, B).
DecayFit fit_decay(const std::vector<double>& rho, const std::vector<double>& value);

struct DecayReport {
  bool pass = false;
  double worst_ratio = 0.0;  // sup |grad u| / (eps rho^(-5/12)) on the theta = 0 ray
  double worst_rho = 0.0;
  int samples = 0;
};

/// |grad u|(rho, 0) <= c_decay eps rho^(-5/12) on every theta = 0 node with
/// rho >= rho_min.
DecayReport decay_check(const MultiGraph& u, double epsilon, double c_decay, double rho_min = 0.0,
                        Exec exec = Exec::parallel);

/// |grad u| along the theta = 0 ray (linear interpolation between columns
/// when 0 is not a node).
std::vector<std::pair<double, double>> ray_gradient(const MultiGraph& u, Exec exec = Exec::parallel);

struct BlowUpPair {
  Vec3 y = Vec3::Zero();
  double s = 0.0;
  double C = 0.0;
  long vertex = -1;
  double A2 = 0.0;
  double scan_radius = 0.0;  // smallest scan radius holding y (0 without a scan)
};

struct BlowUpOptions {
  double tol = 1e-6;
  bool intrinsic = false;             // geodesic (edge-path) balls instead of extrinsic
  std::vector<double> scan_radii;     // restrict centers to |y - scan_center| <= max radius
  Vec3 scan_center = Vec3::Zero();
  Exec exec = Exec::parallel;
};

struct BlowUpReport {
  std::vector<BlowUpPair> pairs;
  long candidates = 0;           // vertices with |A| > 0 examined
  long discarded_boundary = 0;   // passing pairs whose ball leaves the mesh
  long discarded_duplicate = 0;  // passing pairs that are not 1-ring maxima of |A|^2
};

/// Pairs (y, s) with s = C / |A|(y) and sup of |A|^2 over B_s(y) (within the
/// component of y) at most 4 |A|^2(y) (1 + tol). Sorted by x3, then |A|^2
/// descending. Throws when the mesh carries no |A|^2.
BlowUpReport detect_blowup_pairs(const MeshPatch& m, double C, const BlowUpOptions& opt = {});

enum class RegionReason { inside, rho_below_range, rho_above_range, on_axis, not_above_bottom, not_below_top };
std::string to_string(RegionReason r);

struct RegionMembership {
  bool inside = false;
  RegionReason reason = RegionReason::inside;
  double theta = 0.0;   // representative angle in [-2 pi, 0)
  double bottom = 0.0;  // u1(rho, theta - pi N)
  double top = 0.0;     // u1(rho, theta + (N + 2) pi)
};

/// Membership in E = {(rho cos t, rho sin t, z): t in [-2 pi, 0),
/// u1(rho, t - pi N) < z < u1(rho, t + (N + 2) pi)}, with bilinear
/// interpolation in (s, theta). The point is taken in u1's own frame.
/// Throws when u1 does not cover [-2 pi - pi N, (N + 2) pi].
RegionMembership region_E_membership(const MultiGraph& u1, const Vec3& p, double N);

/// Bilinear interpolation of u in (computational radius, theta).
double interpolate_bilinear(const MultiGraph& u, double rho, double theta);

}  // namespace hf

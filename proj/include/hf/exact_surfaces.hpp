#pragma once

#include "hf/geometry.hpp"

#include <optional>
#include <string>

namespace hf {

/// Helicoid {R (s cos t, s sin t, a t) + T}. The sign of the pitch is the
/// handedness. Normal orientation: (a sin t, -a cos t, s) / sqrt(a^2 + s^2).
struct HelicoidModel {
  double pitch = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  void validate() const;

  Vec3 local_point(double s, double t) const;
  Vec3 point(double s, double t) const { return rotation * local_point(s, t) + translation; }
  Vec3 normal(double s, double t) const;
  Mat3 shape(double s, double t) const;
  double A2(double s) const;
  Vec3 axis() const { return rotation.col(2); }

  struct Projection {
    double s = 0.0;
    double t = 0.0;
    double distance = 0.0;
  };
  /// Closest point on the full helicoid to world point p.
  Projection project(const Vec3& p) const;
};

enum class SurfaceKind { plane, helicoid, catenoid };

std::string to_string(SurfaceKind k);
SurfaceKind surface_kind_from_string(const std::string& s);

struct SurfaceParams {
  double pitch = 1.0;              // helicoid
  double neck = 1.0;               // catenoid
  Vec2 tilt = Vec2::Zero();        // plane: u = tilt . (x1, x2) + height
  double height = 0.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};

struct ExactSurface {
  std::optional<MultiGraph> graph;
  MeshPatch mesh;
  std::vector<std::string> warnings;
};

/// Closed-form surface over a polar grid. Graph plus mesh where the surface
/// is a graph over the grid; mesh only (with a warning) otherwise. Analytic
/// derivatives are attached to the graph.
ExactSurface make_surface(SurfaceKind kind, const SurfaceParams& params, const PolarGrid& grid);

/// Analytic graph for a kind; also used to re-attach closed forms to graphs
/// read back from disk.
std::shared_ptr<const AnalyticGraph> analytic_graph(SurfaceKind kind, const SurfaceParams& params);
std::shared_ptr<const AnalyticGraph> analytic_from_descriptor(const nlohmann::json& d);

/// Helicoid piece inside the ball of radius `radius` about the model's
/// origin, sampled on an (s, t) grid that contains the axis s = 0.
/// Triangles are kept when all three vertices lie in the ball.
MeshPatch helicoid_ball_mesh(const HelicoidModel& model, double radius, int n_s, int n_t);

/// Catenoid x3 = neck * arccosh(rho / neck) (both halves), z in
/// [z_lo, z_hi], welded around the waist circle direction.
MeshPatch catenoid_mesh(double neck, double z_lo, double z_hi, int n_z, int n_phi);

/// Flat square [-half, half]^2 at height 0.
MeshPatch plane_mesh(double half, int n);

/// Weierstrass data g = e^{alpha z}, dh = dz.
struct WeierstrassAlpha {
  double alpha1 = 0.0;
  double alpha2 = 1.0;
  double norm() const { return std::hypot(alpha1, alpha2); }
};

struct CurveSamples {
  std::vector<double> t;
  std::vector<Vec2> points;
};

/// Image of the imaginary axis z = i t:
///   x1 = |a|^-2 (a2 sinh(a2 t) sin(a1 t) - a1 cosh(a2 t) cos(a1 t))
///   x2 = |a|^-2 (a2 sinh(a2 t) cos(a1 t) + a1 cosh(a2 t) sin(a1 t))
Vec2 weierstrass_point(const WeierstrassAlpha& alpha, double t);
CurveSamples weierstrass_curve(const WeierstrassAlpha& alpha, double t0, double t1, int n);

struct EmbeddednessVerdict {
  bool embedded = true;
  /// Witness for a self-intersection: parameters of the two coinciding points.
  double t_a = 0.0;
  double t_b = 0.0;
  /// Smallest distance between non-adjacent segments.
  double min_separation = kInfinity;
};

/// Pairwise segment-segment test over all non-adjacent segments. Requires
/// at least 16 samples and tol > 0.
EmbeddednessVerdict embeddedness_verdict(const CurveSamples& c, double tol, Exec exec = Exec::parallel);

}  // namespace hf

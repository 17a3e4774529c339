#pragma once

#include "hf/exact_surfaces.hpp"

#include <optional>

namespace hf {

/// Target surface written as x + nu(x) n(x) over a base mesh.
struct NormalGraph {
  MeshPatch base;
  std::vector<double> nu;
  std::vector<Vec3> grad_nu;   // tangential gradient, ambient components
  double sup_norm = 0.0;       // sup (|nu| + |grad nu|)
  double reconstruction_residual = 0.0;  // max |x + nu n - hit point|
  double search_radius = 0.0;
};

struct NormalGraphOptions {
  double search_radius = 0.25;
  Exec exec = Exec::parallel;
};

/// Casts the normal line of every base vertex against the target triangles
/// within +-search_radius. Exactly one hit is required (hits closer than 1e-9
/// count once); otherwise throws listing the offending vertices.
NormalGraph build_normal_graph(const MeshPatch& base, const MeshPatch& target, const NormalGraphOptions& opt = {});

/// Normal graph from known offsets (grad nu by the same 1-ring fit).
NormalGraph normal_graph_from_offsets(const MeshPatch& base, std::vector<double> nu, Exec exec = Exec::parallel);

/// Tangential gradient of a per-vertex scalar by least squares over the
/// 1-ring in the tangent plane (2-ring when the 1-ring is degenerate).
std::vector<Vec3> tangential_gradient(const MeshPatch& m, const std::vector<double>& f, Exec exec = Exec::parallel);

struct DistortionReport {
  std::vector<double> sigma_min;
  std::vector<double> sigma_max;
  double lip_lo = 1.0;   // min sigma_min
  double lip_hi = 1.0;   // max sigma_max
  double rescale = 1.0;  // factor making the base satisfy |A| <= 1 (singular values are invariant)
  double sup_norm = 0.0;
  std::optional<HelicoidModel> model;
  double fit_residual = 0.0;
};

/// Singular values of d phi(e) = e + <grad nu, e> n + nu Dn(e) on an
/// orthonormal tangent basis at every base vertex. Dn is the base shape
/// operator (quadric fit when the base does not carry one). Throws when the
/// base has no |A|^2.
DistortionReport phi_distortion(const NormalGraph& g, Exec exec = Exec::parallel);

/// phi(x) = x + nu n.
std::vector<Vec3> apply_phi(const NormalGraph& g);

struct FitOptions {
  int max_iterations = 100;
  int max_points = 2000;
  Exec exec = Exec::parallel;
};

struct HelicoidFit {
  HelicoidModel model;
  double residual = 0.0;      // RMS distance of all patch vertices to the model
  double max_distance = 0.0;
  double diameter = 0.0;
  int restarts = 0;
  int converged_restarts = 0;
  int best_restart = -1;
  int iterations = 0;
  bool heuristic = true;
};

/// Least-squares helicoid (rigid motion + pitch) through the patch vertices
/// with a fixed schedule of 8 Levenberg-Marquardt restarts. Needs >= 100
/// vertices and max |A|^2 > 1e-6. Throws when no restart converges.
HelicoidFit fit_helicoid(const MeshPatch& patch, const FitOptions& opt = {});

/// Max distance between the two helicoids over points of each within
/// `radius` of its own origin (symmetric); compares models modulo the screw
/// symmetry.
double helicoid_distance(const HelicoidModel& a, const HelicoidModel& b, double radius);

/// Base mesh on the model: closest points of the patch vertices, patch
/// connectivity, analytic normals and shape.
MeshPatch project_onto_model(const MeshPatch& patch, const HelicoidModel& model, Exec exec = Exec::parallel);

/// project_onto_model + build_normal_graph + phi_distortion.
DistortionReport bilipschitz_estimate(const MeshPatch& patch, const HelicoidModel& model,
                                      const NormalGraphOptions& opt = {});

}  // namespace hf

#pragma once

#include "hf/sheet_analysis.hpp"

#include <cstdint>

namespace hf {

/// Stereographic Gauss map of a graph and |grad_Sigma x3| per node.
struct GaussField {
  PolarGrid grid;
  std::vector<Complex> g;
  std::vector<double> grad_x3;  // from the tangent projection of e3, not from g
  std::vector<char> masked;     // |grad u| < 1e-10: g undefined
  long masked_count = 0;
  bool analytic = false;
};

/// g = -(u_rho + i u_theta / rho) e^{i theta} / (W - 1), W = sqrt(1 + |grad u|^2),
/// with W - 1 evaluated as |grad u|^2 / (W + 1). Throws "flat patch" when
/// every node is masked.
GaussField gauss_from_graph(const MultiGraph& u, Exec exec = Exec::parallel);

/// sup over unmasked nodes of | |grad_Sigma x3| - 2|g| / (1 + |g|^2) |.
double check_gauss_identity(const GaussField& f);

/// max over unmasked nodes of |grad_Sigma x3| - 2 exp(-|log|g||); <= 0 when
/// the inequality holds everywhere.
double gauss_inequality_excess(const GaussField& f);

struct LogBranch {
  std::vector<long> path;
  std::vector<double> h1;
  std::vector<double> h2;
};

/// h = log g along a node path: h1 = log|g|, h2 unwrapped from the principal
/// value at the first node. Throws "path too coarse" on a phase jump above
/// pi / 2 and on masked nodes.
LogBranch log_gauss_branch(const GaussField& f, const std::vector<long>& path);

struct Polyline {
  std::vector<Vec3> points;
  std::vector<int> edges;      // crossing mesh edge per point
  std::vector<int> triangles;  // triangle per segment
  bool closed = false;
};

struct LevelSetTrace {
  double level = 0.0;       // requested level
  double level_used = 0.0;  // after the exact-hit perturbation
  bool perturbed = false;
  std::vector<Polyline> polylines;
  int components() const { return static_cast<int>(polylines.size()); }
};

/// Contour x3 = c through triangle crossings. Vertices exactly at the level
/// move c by 1e-12 of the x3 range. Throws when c is outside the x3 range or
/// the contour crosses a non-manifold edge.
LevelSetTrace trace_level_set(const MeshPatch& m, double c);
LevelSetTrace trace_level_set(const MeshPatch& m, const MeshTopology& topo, double c);
/// Independent levels traced in parallel; errors are rethrown in level order.
std::vector<LevelSetTrace> trace_level_sets(const MeshPatch& m, const std::vector<double>& levels,
                                            Exec exec = Exec::parallel);

enum class Region : std::uint8_t { RA, RS1, RS2 };
std::string to_string(Region r);

struct DecomposeOptions {
  double epsilon0 = 0.5;
  double r1_multiplier = 4.0;
  /// Point on the spiraling axis used for u_theta; defaults to the mean
  /// horizontal position of the pair centers.
  std::optional<Vec3> axis_point;
};

struct DecompositionLabeling {
  std::vector<Region> label;
  std::vector<double> grad_x3;  // sqrt(1 - n3^2)
  std::vector<double> u_theta;  // (n1 x2 - n2 x1) / n3 about the axis point, NaN where |n3| <= 1e-8
  double epsilon0 = 0.5;
  double gamma0 = 0.0;  // log(2 / epsilon0)
  double r1_multiplier = 4.0;
  Vec3 axis_point = Vec3::Zero();
  std::string status;   // "ok" or "flat - decomposition vacuous"
  long count_RA = 0, count_RS1 = 0, count_RS2 = 0;
  long absorbed = 0;    // vertices added from bounded complementary components
  int sign_RS1 = 0, sign_RS2 = 0;  // orientation adjustment per sheet
  std::vector<long> ra_violations;  // R_A vertices with |grad x3| < epsilon0
  std::vector<long> rs_violations;  // R_S vertices with sign * u_theta <= 0
};

/// R_A: components of {|x - y_i| <= R1 s_i, |grad x3| >= eps0} holding a pair
/// center, plus bounded complementary components. R_S splits by the sign of
/// n3. Violations are reported, not thrown.
DecompositionLabeling decompose(const MeshPatch& m, const std::vector<BlowUpPair>& pairs,
                                const DecomposeOptions& opt = {});

}  // namespace hf

#pragma once

#include "hf/mesh.hpp"
#include "hf/multigraph.hpp"

namespace hf {

enum class DerivativeSource {
  automatic,          // analytic when attached, finite differences otherwise
  finite_difference,
  analytic,
};

/// Polar jets plus Cartesian gradient and Hessian per node.
struct Derivatives {
  std::vector<PolarJet> polar;
  std::vector<Vec2> grad;
  std::vector<Mat2> hess;
  bool analytic = false;
};

Vec2 cartesian_gradient(const PolarJet& j, double rho, double theta);
Mat2 cartesian_hessian(const PolarJet& j, double rho, double theta);

/// Second-order centered stencils in the interior, second-order one-sided
/// stencils on the domain edges; mixed derivatives by composing the 1-d
/// operators. Throws when the grid has fewer than 4 nodes along an axis.
Derivatives derivatives(const MultiGraph& u, DerivativeSource src = DerivativeSource::automatic,
                        Exec exec = Exec::parallel);

/// Separation w(rho, theta) = u(rho, theta + 2 pi) - u(rho, theta) on the
/// overlap theta in [theta1, theta2 - 2 pi].
struct Separation {
  bool empty = true;
  std::optional<PolarGrid> grid;
  std::vector<double> w;
  int sign = 0;               // +1 / -1 when w has one strict sign, 0 otherwise
  std::vector<long> zero_nodes;  // overlap-grid nodes where |w| <= zero_tol
  int column_shift = 0;       // 0 when the shift needed interpolation
};

Separation separation(const MultiGraph& u, double zero_tol = 0.0);

/// Separation as a graph on the overlap grid, with analytic derivatives
/// when u carries them. Throws on an empty overlap.
MultiGraph separation_graph(const MultiGraph& u);

/// Embeds the graph as a triangle mesh. Each (rho, theta) cell becomes two
/// triangles and nodes are never welded across sheets. Normals and |A|^2
/// come from the graph formulas on derivatives().
MeshPatch graph_embed(const MultiGraph& u, Exec exec = Exec::parallel);

/// Shared cell triangulation used by graph_embed and the solver.
std::vector<Triangle> grid_triangles(const PolarGrid& grid);

/// |A|^2 of a graph from the exact graph curvature formulas.
std::vector<double> second_fundamental(const MultiGraph& u, Exec exec = Exec::parallel);

/// Per-vertex curvature from a quadric fit over the 2-ring.
struct CurvatureFit {
  std::vector<double> A2;
  std::vector<Mat3> shape;          // ambient differential of the normal
  std::vector<Vec3> fitted_normals;
};

CurvatureFit quadric_curvature(const MeshPatch& m, Exec exec = Exec::parallel);

/// |A|^2 of a mesh via the quadric fit. Throws on degenerate triangles
/// (area < 1e-14 * scale^2).
std::vector<double> second_fundamental(const MeshPatch& m, Exec exec = Exec::parallel);

/// Fills normals (when missing), A2 and shape from the quadric fit.
void attach_curvature(MeshPatch& m, Exec exec = Exec::parallel);

/// Graph-shape quantities at a point from a polar jet: upward unit normal,
/// ambient normal differential, |A|^2.
struct GraphPointGeometry {
  Vec3 normal;
  Mat3 shape;
  double A2 = 0.0;
};
GraphPointGeometry graph_point_geometry(const PolarJet& j, double rho, double theta);
/// Same from a Cartesian gradient and Hessian.
GraphPointGeometry graph_geometry(const Vec2& grad, const Mat2& hess);

struct Cone {
  Vec3 vertex = Vec3::Zero();
  double delta = 1.0;
};

/// Membership in the closed cone complement
/// (x3 - y3)^2 <= delta^2 ((x1 - y1)^2 + (x2 - y2)^2).
bool cone_membership(const Vec3& p, const Cone& cone);

}  // namespace hf

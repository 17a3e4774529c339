#pragma once

#include "hf/common.hpp"

#include <array>

namespace hf {

using Triangle = std::array<int, 3>;

/// Oriented triangulated surface patch with per-vertex unit normals and
/// |A|^2 estimates. `shape` optionally carries the ambient differential of
/// the unit normal (a symmetric 3x3 map that kills the normal); it is filled
/// by generators that know it in closed form and by the quadric fit.
struct MeshPatch {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<Vec3> normals;
  std::vector<double> A2;
  std::vector<Mat3> shape;

  long vertex_count() const { return static_cast<long>(vertices.size()); }
  long triangle_count() const { return static_cast<long>(triangles.size()); }

  /// Index validity, normal length (1e-12), per-vertex array sizes.
  void validate() const;
};

/// Edge and neighborhood structure of a MeshPatch.
struct MeshTopology {
  struct Edge {
    int a = -1;
    int b = -1;
    int t0 = -1;
    int t1 = -1;  // -1 on boundary edges
  };
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> triangle_edges;
  std::vector<std::vector<int>> neighbors;           // sorted 1-ring
  std::vector<std::vector<int>> vertex_triangles;
  std::vector<char> boundary_vertex;
  std::vector<int> component;
  int component_count = 0;
  std::vector<long> nonmanifold_edges;
  std::vector<long> inconsistent_edges;  // neighbors disagree on orientation

  bool manifold() const { return nonmanifold_edges.empty(); }
  /// Vertices within k edge hops of v (v included), sorted.
  std::vector<int> ring(int v, int k) const;
};

MeshTopology build_topology(const MeshPatch& m);

double triangle_area(const MeshPatch& m, long t);

/// Bounding-box diagonal; the length scale used by degeneracy thresholds.
double patch_scale(const MeshPatch& m);

/// Unit normals by area-weighted averaging of incident face normals.
std::vector<Vec3> area_weighted_normals(const MeshPatch& m);

/// x -> R x + t applied to vertices; normals and shape operators rotate,
/// |A|^2 is unchanged.
MeshPatch transformed(const MeshPatch& m, const Mat3& R, const Vec3& t);

/// x -> lambda x; |A|^2 scales by lambda^-2 and the shape operator by lambda^-1.
MeshPatch scaled(const MeshPatch& m, double lambda);

/// Orthonormal tangent basis (t1, t2) with t1 x t2 = n.
std::pair<Vec3, Vec3> tangent_basis(const Vec3& n);

/// Rotation from an axis-angle vector (Rodrigues).
Mat3 rotation_from_vector(const Vec3& w);

/// Uniform bucket grid over 3-d points for radius queries.
class PointGrid {
 public:
  PointGrid(const std::vector<Vec3>& points, double cell);
  /// Indices of points within distance r of p, in increasing index order.
  std::vector<int> within(const Vec3& p, double r) const;
  double cell() const { return cell_; }

 private:
  long key(long ix, long iy, long iz) const;
  const std::vector<Vec3>* pts_;
  double cell_;
  Vec3 lo_;
  long nx_ = 1, ny_ = 1, nz_ = 1;
  std::vector<long> start_;
  std::vector<int> items_;
};

}  // namespace hf

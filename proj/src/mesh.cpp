#include "hf/mesh.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <numeric>
#include <sstream>

namespace hf {

void MeshPatch::validate() const {
  const long nv = vertex_count();
  for (long t = 0; t < triangle_count(); ++t)
    for (int c = 0; c < 3; ++c)
      if (triangles[t][c] < 0 || triangles[t][c] >= nv) {
        std::ostringstream os;
        os << "MeshPatch: triangle " << t << " indexes missing vertex " << triangles[t][c];
        throw Error(os.str(), {t});
      }
  if (!normals.empty()) {
    if (static_cast<long>(normals.size()) != nv) throw Error("MeshPatch: normal count mismatch");
    for (long v = 0; v < nv; ++v)
      if (std::abs(normals[v].norm() - 1.0) > 1e-12)
        throw Error("MeshPatch: normal is not unit length", {v});
  }
  if (!A2.empty() && static_cast<long>(A2.size()) != nv)
    throw Error("MeshPatch: |A|^2 count mismatch");
  if (!shape.empty() && static_cast<long>(shape.size()) != nv)
    throw Error("MeshPatch: shape operator count mismatch");
}

MeshTopology build_topology(const MeshPatch& m) {
  MeshTopology topo;
  const long nv = m.vertex_count();
  const long nt = m.triangle_count();

  struct HalfEdge {
    int lo, hi;
    int tri;
    int local;
    bool forward;  // lo -> hi in triangle order
  };
  std::vector<HalfEdge> half;
  half.reserve(3 * nt);
  for (long t = 0; t < nt; ++t)
    for (int c = 0; c < 3; ++c) {
      const int a = m.triangles[t][c];
      const int b = m.triangles[t][(c + 1) % 3];
      half.push_back({std::min(a, b), std::max(a, b), static_cast<int>(t), c, a < b});
    }
  std::sort(half.begin(), half.end(), [](const HalfEdge& x, const HalfEdge& y) {
    if (x.lo != y.lo) return x.lo < y.lo;
    if (x.hi != y.hi) return x.hi < y.hi;
    return x.tri < y.tri;
  });

  topo.triangle_edges.assign(nt, {-1, -1, -1});
  for (std::size_t i = 0; i < half.size();) {
    std::size_t j = i;
    while (j < half.size() && half[j].lo == half[i].lo && half[j].hi == half[i].hi) ++j;
    const long e = static_cast<long>(topo.edges.size());
    MeshTopology::Edge edge{half[i].lo, half[i].hi, half[i].tri, -1};
    if (j - i >= 2) edge.t1 = half[i + 1].tri;
    if (j - i > 2) topo.nonmanifold_edges.push_back(e);
    if (j - i == 2 && half[i].forward == half[i + 1].forward) topo.inconsistent_edges.push_back(e);
    for (std::size_t k = i; k < j; ++k) topo.triangle_edges[half[k].tri][half[k].local] = static_cast<int>(e);
    topo.edges.push_back(edge);
    i = j;
  }

  topo.neighbors.assign(nv, {});
  topo.vertex_triangles.assign(nv, {});
  topo.boundary_vertex.assign(nv, 0);
  for (const auto& e : topo.edges) {
    topo.neighbors[e.a].push_back(e.b);
    topo.neighbors[e.b].push_back(e.a);
    if (e.t1 < 0) topo.boundary_vertex[e.a] = topo.boundary_vertex[e.b] = 1;
  }
  for (auto& nb : topo.neighbors) std::sort(nb.begin(), nb.end());
  for (long t = 0; t < nt; ++t)
    for (int c = 0; c < 3; ++c) topo.vertex_triangles[m.triangles[t][c]].push_back(static_cast<int>(t));

  // Connected components by union-find over edges.
  std::vector<int> parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : topo.edges) {
    const int ra = find(e.a), rb = find(e.b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  topo.component.assign(nv, -1);
  std::vector<int> label(nv, -1);
  for (long v = 0; v < nv; ++v) {
    const int r = find(static_cast<int>(v));
    if (label[r] < 0) label[r] = topo.component_count++;
    topo.component[v] = label[r];
  }
  return topo;
}

std::vector<int> MeshTopology::ring(int v, int k) const {
  std::vector<int> frontier{v}, seen{v};
  for (int step = 0; step < k; ++step) {
    std::vector<int> next;
    for (int x : frontier)
      for (int y : neighbors[x])
        if (std::find(seen.begin(), seen.end(), y) == seen.end()) {
          seen.push_back(y);
          next.push_back(y);
        }
    frontier = std::move(next);
  }
  std::sort(seen.begin(), seen.end());
  return seen;
}

double triangle_area(const MeshPatch& m, long t) {
  const auto& tri = m.triangles[t];
  const Vec3 e1 = m.vertices[tri[1]] - m.vertices[tri[0]];
  const Vec3 e2 = m.vertices[tri[2]] - m.vertices[tri[0]];
  return 0.5 * e1.cross(e2).norm();
}

double patch_scale(const MeshPatch& m) {
  if (m.vertices.empty()) return 0.0;
  Vec3 lo = m.vertices.front(), hi = lo;
  for (const auto& v : m.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

std::vector<Vec3> area_weighted_normals(const MeshPatch& m) {
  std::vector<Vec3> acc(m.vertices.size(), Vec3::Zero());
  for (const auto& tri : m.triangles) {
    const Vec3 e1 = m.vertices[tri[1]] - m.vertices[tri[0]];
    const Vec3 e2 = m.vertices[tri[2]] - m.vertices[tri[0]];
    const Vec3 n = e1.cross(e2);  // length = 2 * area
    for (int c = 0; c < 3; ++c) acc[tri[c]] += n;
  }
  for (auto& n : acc) {
    const double len = n.norm();
    n = len > 0.0 ? Vec3(n / len) : Vec3(0, 0, 1);
  }
  return acc;
}

MeshPatch transformed(const MeshPatch& m, const Mat3& R, const Vec3& t) {
  MeshPatch out = m;
  for (auto& v : out.vertices) v = R * v + t;
  for (auto& n : out.normals) n = (R * n).normalized();
  for (auto& s : out.shape) s = R * s * R.transpose();
  return out;
}

MeshPatch scaled(const MeshPatch& m, double lambda) {
  if (!(lambda > 0.0)) throw Error("scaled: factor must be positive");
  MeshPatch out = m;
  for (auto& v : out.vertices) v *= lambda;
  for (auto& a : out.A2) a /= lambda * lambda;
  for (auto& s : out.shape) s /= lambda;
  return out;
}

std::pair<Vec3, Vec3> tangent_basis(const Vec3& n) {
  const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  Vec3 t1 = (helper - helper.dot(n) * n).normalized();
  Vec3 t2 = n.cross(t1);
  return {t1, t2};
}

Mat3 rotation_from_vector(const Vec3& w) {
  const double angle = w.norm();
  if (angle == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

PointGrid::PointGrid(const std::vector<Vec3>& points, double cell) : pts_(&points), cell_(cell) {
  if (!(cell > 0.0)) throw Error("PointGrid: cell size must be positive");
  if (points.empty()) {
    lo_ = Vec3::Zero();
    start_.assign(2, 0);
    return;
  }
  lo_ = points.front();
  Vec3 hi = lo_;
  for (const auto& p : points) {
    lo_ = lo_.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  // Keep the cell count bounded for thin or huge extents.
  for (;;) {
    nx_ = static_cast<long>((hi.x() - lo_.x()) / cell_) + 1;
    ny_ = static_cast<long>((hi.y() - lo_.y()) / cell_) + 1;
    nz_ = static_cast<long>((hi.z() - lo_.z()) / cell_) + 1;
    if (nx_ * ny_ * nz_ <= 4'000'000) break;
    cell_ *= 2.0;
  }
  std::vector<long> keys(points.size());
  start_.assign(nx_ * ny_ * nz_ + 1, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3 q = (points[i] - lo_) / cell_;
    keys[i] = key(static_cast<long>(q.x()), static_cast<long>(q.y()), static_cast<long>(q.z()));
    ++start_[keys[i] + 1];
  }
  std::partial_sum(start_.begin(), start_.end(), start_.begin());
  items_.resize(points.size());
  std::vector<long> fill(start_.begin(), start_.end() - 1);
  for (std::size_t i = 0; i < points.size(); ++i) items_[fill[keys[i]]++] = static_cast<int>(i);
}

long PointGrid::key(long ix, long iy, long iz) const {
  ix = std::clamp(ix, 0L, nx_ - 1);
  iy = std::clamp(iy, 0L, ny_ - 1);
  iz = std::clamp(iz, 0L, nz_ - 1);
  return (iz * ny_ + iy) * nx_ + ix;
}

std::vector<int> PointGrid::within(const Vec3& p, double r) const {
  std::vector<int> out;
  if (pts_->empty()) return out;
  const Vec3 a = (p - lo_ - Vec3::Constant(r)) / cell_;
  const Vec3 b = (p - lo_ + Vec3::Constant(r)) / cell_;
  const long x0 = std::max(0L, static_cast<long>(std::floor(a.x())));
  const long y0 = std::max(0L, static_cast<long>(std::floor(a.y())));
  const long z0 = std::max(0L, static_cast<long>(std::floor(a.z())));
  const long x1 = std::min(nx_ - 1, static_cast<long>(std::floor(b.x())));
  const long y1 = std::min(ny_ - 1, static_cast<long>(std::floor(b.y())));
  const long z1 = std::min(nz_ - 1, static_cast<long>(std::floor(b.z())));
  const double r2 = r * r;
  for (long z = z0; z <= z1; ++z)
    for (long y = y0; y <= y1; ++y)
      for (long x = x0; x <= x1; ++x) {
        const long k = (z * ny_ + y) * nx_ + x;
        for (long s = start_[k]; s < start_[k + 1]; ++s) {
          const int i = items_[s];
          if (((*pts_)[i] - p).squaredNorm() <= r2) out.push_back(i);
        }
      }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace hf

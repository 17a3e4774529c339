#pragma once

#include "hf/common.hpp"
#include "hf/polar_grid.hpp"

#include <json.hpp>

#include <functional>
#include <memory>
#include <optional>

namespace hf {

/// Value and polar derivatives of a graph function at one point:
/// u, u_rho, u_theta, u_rho_rho, u_rho_theta, u_theta_theta.
struct PolarJet {
  double u = 0.0;
  double u_r = 0.0;
  double u_t = 0.0;
  double u_rr = 0.0;
  double u_rt = 0.0;
  double u_tt = 0.0;

  PolarJet operator-(const PolarJet& o) const {
    return {u - o.u, u_r - o.u_r, u_t - o.u_t, u_rr - o.u_rr, u_rt - o.u_rt, u_tt - o.u_tt};
  }
  PolarJet operator+(const PolarJet& o) const {
    return {u + o.u, u_r + o.u_r, u_t + o.u_t, u_rr + o.u_rr, u_rt + o.u_rt, u_tt + o.u_tt};
  }
};

using GraphFunction = std::function<PolarJet(double rho, double theta)>;

/// Closed-form graph attached to sampled data so downstream operations can
/// bypass finite differences. `descriptor` is what gets serialized; a loader
/// rebuilds `eval` from it.
struct AnalyticGraph {
  GraphFunction eval;
  nlohmann::json descriptor;
};

/// Sampled multivalued graph u over a polar rectangle. The embedded surface is
/// frame * Phi_u(rho, theta) + center with Phi_u = (rho cos, rho sin, u).
struct MultiGraph {
  PolarGrid grid;
  std::vector<double> values;
  Vec3 center = Vec3::Zero();
  Mat3 frame = Mat3::Identity();
  std::shared_ptr<const AnalyticGraph> analytic;
  /// Sup-norm residual of the discrete equation this graph was solved under.
  std::optional<double> solver_residual;

  MultiGraph(PolarGrid g, std::vector<double> v);

  static MultiGraph from_function(const PolarGrid& grid, const GraphFunction& f);
  static MultiGraph from_analytic(const PolarGrid& grid, std::shared_ptr<const AnalyticGraph> a);

  double at(int i, int j) const { return values[grid.index(i, j)]; }
  double winding() const { return grid.winding(); }
  bool has_analytic() const { return analytic != nullptr; }

  /// Throws hf::Error naming the first non-finite node.
  void validate() const;

  /// Point Phi_u(node) in the graph's own frame (no frame/center applied).
  Vec3 local_point(long k) const;
  Vec3 world_point(long k) const { return frame * local_point(k) + center; }
};

/// Graph with values shifted by a constant; analytic data follows along.
MultiGraph add_constant(const MultiGraph& u, double c);

/// Graph u + f where f is evaluated on the same grid (analytic data follows
/// along when both sides have it).
MultiGraph add_function(const MultiGraph& u, const GraphFunction& f);

}  // namespace hf

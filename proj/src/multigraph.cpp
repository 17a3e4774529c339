#include "hf/multigraph.hpp"

#include <sstream>

namespace hf {

MultiGraph::MultiGraph(PolarGrid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (static_cast<long>(values.size()) != grid.size())
    throw Error("MultiGraph: value count does not match grid size");
}

MultiGraph MultiGraph::from_function(const PolarGrid& grid, const GraphFunction& f) {
  std::vector<double> v(grid.size());
  for (int i = 0; i < grid.n_rho(); ++i)
    for (int j = 0; j < grid.n_theta(); ++j) v[grid.index(i, j)] = f(grid.rho(i), grid.theta(j)).u;
  return MultiGraph(grid, std::move(v));
}

MultiGraph MultiGraph::from_analytic(const PolarGrid& grid, std::shared_ptr<const AnalyticGraph> a) {
  MultiGraph g = from_function(grid, a->eval);
  g.analytic = std::move(a);
  return g;
}

void MultiGraph::validate() const {
  for (long k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(values[k])) {
      std::ostringstream os;
      os << "MultiGraph: non-finite value at node " << k << " (i=" << grid.radial_index(k)
         << ", j=" << grid.angular_index(k) << ")";
      throw Error(os.str(), {k});
    }
  }
}

Vec3 MultiGraph::local_point(long k) const {
  const double r = grid.rho(grid.radial_index(k));
  const double t = grid.theta(grid.angular_index(k));
  return {r * std::cos(t), r * std::sin(t), values[k]};
}

MultiGraph add_constant(const MultiGraph& u, double c) {
  return add_function(u, [c](double, double) { return PolarJet{c, 0, 0, 0, 0, 0}; });
}

MultiGraph add_function(const MultiGraph& u, const GraphFunction& f) {
  MultiGraph out = u;
  for (int i = 0; i < u.grid.n_rho(); ++i)
    for (int j = 0; j < u.grid.n_theta(); ++j)
      out.values[u.grid.index(i, j)] += f(u.grid.rho(i), u.grid.theta(j)).u;
  out.solver_residual.reset();
  if (u.analytic) {
    auto base = u.analytic;
    auto a = std::make_shared<AnalyticGraph>();
    a->eval = [base, f](double r, double t) { return base->eval(r, t) + f(r, t); };
    a->descriptor = nlohmann::json{{"kind", "composite"}};
    out.analytic = std::move(a);
  }
  return out;
}

}  // namespace hf

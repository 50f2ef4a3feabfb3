#include "dtnlab/grid.hpp"

#include <cmath>

#include "dtnlab/errors.hpp"

namespace dtnlab::grid {

std::array<int, 2> Grid::multi_index(int id) const {
  if (dim == 1) return {id, 0};
  return {id % counts[0], id / counts[0]};
}

std::array<double, 2> Grid::coords(int id) const {
  auto mi = multi_index(id);
  return {mi[0] * spacing[0], dim == 1 ? 0.0 : mi[1] * spacing[1]};
}

bool Grid::is_corner(int id) const {
  if (dim == 1) return false;
  auto mi = multi_index(id);
  bool ex = mi[0] == 0 || mi[0] == counts[0] - 1;
  bool ey = mi[1] == 0 || mi[1] == counts[1] - 1;
  return ex && ey;
}

Grid build_grid(int dim, const std::vector<double>& extents, const std::vector<int>& counts) {
  if (dim != 1 && dim != 2) throw ConfigError("grid dim must be 1 or 2");
  if (extents.size() != static_cast<size_t>(dim) || counts.size() != static_cast<size_t>(dim))
    throw ConfigError("extents/counts length must equal dim");
  for (int a = 0; a < dim; ++a) {
    if (counts[a] < 3) throw ConfigError("counts must be >= 3 per axis (no interior otherwise)");
    if (!(extents[a] > 0.0)) throw ConfigError("extents must be positive");
  }

  Grid g;
  g.dim = dim;
  for (int a = 0; a < dim; ++a) {
    g.extents[a] = extents[a];
    g.counts[a] = counts[a];
    g.spacing[a] = extents[a] / (counts[a] - 1);
  }
  if (dim == 1) {
    g.counts[1] = 1;
    g.extents[1] = 0.0;
    g.spacing[1] = 0.0;
  }

  const int n = g.node_count();
  g.interior_pos.assign(n, -1);
  g.boundary_pos.assign(n, -1);
  for (int id = 0; id < n; ++id) {
    auto mi = g.multi_index(id);
    bool on_edge;
    if (dim == 1) {
      on_edge = mi[0] == 0 || mi[0] == g.counts[0] - 1;
    } else {
      on_edge = mi[0] == 0 || mi[0] == g.counts[0] - 1 || mi[1] == 0 || mi[1] == g.counts[1] - 1;
    }
    if (!on_edge) {
      g.interior_pos[id] = static_cast<int>(g.interior_ids.size());
      g.interior_ids.push_back(id);
    } else if (!g.is_corner(id)) {
      g.boundary_pos[id] = static_cast<int>(g.boundary_ids.size());
      g.boundary_ids.push_back(id);
    }
  }
  return g;
}

Metric constant_metric(const Grid& g, double c, std::array<double, 2> base) {
  if (!(c > 0.0)) throw ConfigError("conformal factor must be positive");
  Metric m;
  m.conformal = Eigen::VectorXd::Constant(g.node_count(), c);
  m.base = base;
  return m;
}

Metric metric_from_function(const Grid& g, const std::function<double(double, double)>& c,
                            std::array<double, 2> base) {
  Eigen::VectorXd v(g.node_count());
  for (int id = 0; id < g.node_count(); ++id) {
    auto xy = g.coords(id);
    v[id] = c(xy[0], xy[1]);
  }
  return metric_from_values(g, std::move(v), base);
}

Metric metric_from_values(const Grid& g, Eigen::VectorXd node_values, std::array<double, 2> base) {
  if (node_values.size() != g.node_count())
    throw ConfigError("metric node array length must equal node count");
  if ((node_values.array() <= 0.0).any())
    throw ConfigError("conformal factor must be positive at every node");
  for (int a = 0; a < g.dim; ++a)
    if (!(base[a] > 0.0)) throw ConfigError("base metric coefficients must be positive");
  Metric m;
  m.conformal = std::move(node_values);
  m.base = base;
  return m;
}

double metric_density(const Grid& g, const Metric& m, int id) {
  const double c = m.conformal[id];
  if (g.dim == 1) return std::sqrt(c * m.base[0]);
  return c * std::sqrt(m.base[0] * m.base[1]);
}

double flux_coefficient(const Grid& g, const Metric& m, int id, int axis) {
  // sqrt(|g|) g^{aa} with g = c * diag(base): c^{d/2-1} * sqrt(prod base) / base[a].
  // In 2D the conformal factor cancels (conformal invariance of the stiffness).
  const double c = m.conformal[id];
  const double prod = g.dim == 1 ? m.base[0] : m.base[0] * m.base[1];
  return std::pow(c, 0.5 * g.dim - 1.0) * std::sqrt(prod) / m.base[axis];
}

QuadratureWeights compute_weights(const Grid& g, const Metric& m) {
  if (m.conformal.size() != g.node_count())
    throw ConfigError("metric sampled on wrong node count");
  if ((m.conformal.array() <= 0.0).any())
    throw ConfigError("conformal factor must be positive at every node");

  QuadratureWeights w;
  const double vol = g.cell_volume();
  w.mass.resize(g.interior_count());
  for (int i = 0; i < g.interior_count(); ++i)
    w.mass[i] = metric_density(g, m, g.interior_ids[i]) * vol;

  w.boundary.resize(g.boundary_count());
  for (int b = 0; b < g.boundary_count(); ++b) {
    const int id = g.boundary_ids[b];
    if (g.dim == 1) {
      w.boundary[b] = 1.0;  // counting measure on the two endpoints
      continue;
    }
    auto mi = g.multi_index(id);
    // Tangential axis: y on the x-faces, x on the y-faces.
    const int tang = (mi[0] == 0 || mi[0] == g.counts[0] - 1) ? 1 : 0;
    w.boundary[b] = std::sqrt(m.conformal[id] * m.base[tang]) * g.spacing[tang];
  }
  return w;
}

}  // namespace dtnlab::grid

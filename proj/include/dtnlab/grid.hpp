#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <vector>

namespace dtnlab::grid {

// Tensor grid on a box [0,Lx] x [0,Ly] (or an interval in 1D). Node ids are
// lexicographic with x fastest: id = iy*nx + ix. Corner nodes in 2D belong to
// neither partition: under the 5-point stencil they couple to no interior
// node, so keeping them would put zero rows into every boundary operator.
struct Grid {
  int dim = 0;
  std::array<double, 2> extents{0.0, 0.0};
  std::array<int, 2> counts{0, 0};
  std::array<double, 2> spacing{0.0, 0.0};
  std::vector<int> interior_ids;
  std::vector<int> boundary_ids;
  std::vector<int> interior_pos;  // node id -> index in interior_ids, else -1
  std::vector<int> boundary_pos;  // node id -> index in boundary_ids, else -1

  int node_count() const { return dim == 1 ? counts[0] : counts[0] * counts[1]; }
  int interior_count() const { return static_cast<int>(interior_ids.size()); }
  int boundary_count() const { return static_cast<int>(boundary_ids.size()); }
  double cell_volume() const { return dim == 1 ? spacing[0] : spacing[0] * spacing[1]; }

  std::array<int, 2> multi_index(int id) const;
  std::array<double, 2> coords(int id) const;
  bool is_corner(int id) const;
};

Grid build_grid(int dim, const std::vector<double>& extents, const std::vector<int>& counts);

// Conformal multiple of a product base metric: g = c(x) * diag(base).
// The base coefficients are per-axis constants (identity for Euclidean).
struct Metric {
  Eigen::VectorXd conformal;                // c at every node, > 0
  std::array<double, 2> base{1.0, 1.0};     // base[1] ignored in 1D
};

Metric constant_metric(const Grid& g, double c = 1.0, std::array<double, 2> base = {1.0, 1.0});
Metric metric_from_function(const Grid& g, const std::function<double(double, double)>& c,
                            std::array<double, 2> base = {1.0, 1.0});
Metric metric_from_values(const Grid& g, Eigen::VectorXd node_values,
                          std::array<double, 2> base = {1.0, 1.0});

// Discrete measures: mass is the L2 weight per interior node, boundary the
// surface measure per boundary node (weight 1 per endpoint in 1D).
struct QuadratureWeights {
  Eigen::VectorXd mass;
  Eigen::VectorXd boundary;
};

QuadratureWeights compute_weights(const Grid& g, const Metric& m);

// sqrt(|g|) at a node.
double metric_density(const Grid& g, const Metric& m, int id);
// sqrt(|g|) * g^{aa} at a node, the flux coefficient of the divergence form.
double flux_coefficient(const Grid& g, const Metric& m, int id, int axis);

}  // namespace dtnlab::grid

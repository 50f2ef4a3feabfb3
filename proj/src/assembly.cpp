#include "dtnlab/assembly.hpp"

#include <cmath>
#include <fstream>

#include "dtnlab/errors.hpp"

namespace dtnlab::assembly {

using grid::Grid;
using grid::Metric;

Potential make_potential(const Grid& g, const std::function<double(double, double)>& q,
                         double aleph) {
  Eigen::VectorXd v(g.interior_count());
  for (int i = 0; i < g.interior_count(); ++i) {
    auto xy = g.coords(g.interior_ids[i]);
    v[i] = q(xy[0], xy[1]);
  }
  return potential_from_interior_values(g, std::move(v), aleph);
}

Potential potential_from_interior_values(const Grid& g, Eigen::VectorXd values, double aleph) {
  if (values.size() != g.interior_count())
    throw ConfigError("potential must be sampled on all interior nodes");
  if (aleph < 0.0) throw ConfigError("aleph must be nonnegative");
  if ((values.array() < 0.0).any() || (values.array() > aleph).any())
    throw ConfigError("potential values must lie in [0, aleph]");
  return Potential{std::move(values), aleph};
}

Eigen::MatrixXcd BlockOperator::shifted_interior_matrix() const {
  Eigen::MatrixXcd A = A_II.cast<std::complex<double>>();
  if (shift)
    for (Eigen::Index k = 0; k < M.size(); ++k) A(k, k) -= *shift * M[k];
  return A;
}

namespace {

int neighbor_id(const Grid& g, int id, int axis, int dir) {
  auto mi = g.multi_index(id);
  mi[axis] += dir;
  if (mi[axis] < 0 || mi[axis] >= g.counts[axis]) return -1;
  return g.dim == 1 ? mi[0] : mi[1] * g.counts[0] + mi[0];
}

}  // namespace

BlockOperator assemble(const Grid& g, const Metric& m, const Potential& q,
                       std::optional<std::complex<double>> shift) {
  if (q.values.size() != g.interior_count())
    throw ConfigError("potential/grid size mismatch");
  const auto weights = grid::compute_weights(g, m);
  const int ni = g.interior_count();
  const int nb = g.boundary_count();
  const double vol = g.cell_volume();

  BlockOperator op;
  op.dim = g.dim;
  op.A_II = Eigen::MatrixXd::Zero(ni, ni);
  op.A_IB = Eigen::MatrixXd::Zero(ni, nb);
  op.A_BB = Eigen::VectorXd::Zero(nb);
  op.M = weights.mass;
  op.W = weights.boundary;
  op.shift = shift;

  // Divergence-form stencil: the face between adjacent nodes carries the
  // arithmetic mean of their flux coefficients, and each row is scaled by
  // the cell volume so that A_II phi = lambda M phi with M = rho * vol.
  for (int i = 0; i < ni; ++i) {
    const int id = g.interior_ids[i];
    double diag = q.values[i] * grid::metric_density(g, m, id) * vol;
    for (int axis = 0; axis < g.dim; ++axis) {
      const double h2 = g.spacing[axis] * g.spacing[axis];
      for (int dir : {-1, +1}) {
        const int nid = neighbor_id(g, id, axis, dir);
        if (nid < 0) continue;  // cannot happen for interior nodes
        const double face = 0.5 * (grid::flux_coefficient(g, m, id, axis) +
                                   grid::flux_coefficient(g, m, nid, axis));
        const double coupling = face * vol / h2;
        diag += coupling;
        if (g.interior_pos[nid] >= 0) {
          op.A_II(i, g.interior_pos[nid]) = -coupling;
        } else if (g.boundary_pos[nid] >= 0) {
          const int b = g.boundary_pos[nid];
          op.A_IB(i, b) = -coupling;
          op.A_BB[b] += coupling;
        }
        // Corner neighbors are impossible: an interior node's neighbors lie
        // on at most one face.
      }
    }
    op.A_II(i, i) = diag;
  }
  return op;
}

Eigen::VectorXd apply_dirichlet_solve(const BlockOperator& op, const Eigen::VectorXd& f) {
  if (f.size() != op.boundary_count()) throw ConfigError("boundary data has wrong length");
  if (!op.has_real_shift())
    throw ConfigError("complex shift requires complex boundary data");
  Eigen::MatrixXd A = op.A_II;
  if (op.shift)
    for (Eigen::Index k = 0; k < op.M.size(); ++k) A(k, k) -= op.shift->real() * op.M[k];
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  detail::check_pivots(lu);
  return lu.solve((-op.A_IB * f).eval());
}

Eigen::VectorXcd apply_dirichlet_solve(const BlockOperator& op, const Eigen::VectorXcd& f) {
  if (f.size() != op.boundary_count()) throw ConfigError("boundary data has wrong length");
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(op.shifted_interior_matrix());
  detail::check_pivots(lu);
  return lu.solve((-op.A_IB.cast<std::complex<double>>() * f).eval());
}

void dump_operator(const BlockOperator& op, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open dump file: " + path);
  out.precision(17);
  for (int i = 0; i < op.A_II.rows(); ++i)
    for (int j = 0; j < op.A_II.cols(); ++j)
      if (op.A_II(i, j) != 0.0) out << "A_II " << i << ' ' << j << ' ' << op.A_II(i, j) << '\n';
  for (int i = 0; i < op.A_IB.rows(); ++i)
    for (int j = 0; j < op.A_IB.cols(); ++j)
      if (op.A_IB(i, j) != 0.0) out << "A_IB " << i << ' ' << j << ' ' << op.A_IB(i, j) << '\n';
  for (int b = 0; b < op.A_BB.size(); ++b) out << "A_BB " << b << ' ' << b << ' ' << op.A_BB[b] << '\n';
  for (int i = 0; i < op.M.size(); ++i) out << "M " << i << ' ' << i << ' ' << op.M[i] << '\n';
  for (int b = 0; b < op.W.size(); ++b) out << "W " << b << ' ' << b << ' ' << op.W[b] << '\n';
}

}  // namespace dtnlab::assembly

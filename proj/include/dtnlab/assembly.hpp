#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "dtnlab/errors.hpp"
#include "dtnlab/grid.hpp"

namespace dtnlab::assembly {

namespace detail {

// Shared singularity guard for LU factorizations of the (shifted) interior
// matrix: a collapsed pivot means the shift sits on the spectrum, which is a
// modelling problem (move the shift), not a resolution problem.
template <typename Lu>
void check_pivots(const Lu& lu) {
  const auto d = lu.matrixLU().diagonal();
  double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    const double a = std::abs(d[k]);
    dmax = std::max(dmax, a);
    dmin = std::min(dmin, a);
  }
  if (dmax == 0.0 || dmin <= 1e-13 * dmax)
    throw SingularSystemError("interior system is singular: shift lies on the spectrum");
}

}  // namespace detail

// Potential samples on interior nodes (in interior_ids order). Boundary values
// of q are never used; potentials are conceptually extended by zero.
struct Potential {
  Eigen::VectorXd values;
  double aleph = 0.0;
};

Potential make_potential(const grid::Grid& g, const std::function<double(double, double)>& q,
                         double aleph);
Potential potential_from_interior_values(const grid::Grid& g, Eigen::VectorXd values, double aleph);

// The discrete Schrodinger operator -div(a grad) + q rho in interior/boundary
// block form, scaled so that A_II phi = lambda M phi is the eigenproblem.
// A_II stores the unshifted matrix; `shift` records an optional spectral
// shift lambda, and shifted solves factor A_II - lambda M on demand.
struct BlockOperator {
  Eigen::MatrixXd A_II;   // interior x interior, symmetric
  Eigen::MatrixXd A_IB;   // interior x boundary; A_BI is its transpose
  Eigen::VectorXd A_BB;   // boundary diagonal: sum of |couplings to interior|, q independent
  Eigen::VectorXd M;      // interior mass diagonal
  Eigen::VectorXd W;      // boundary quadrature weights
  std::optional<std::complex<double>> shift;
  int dim = 0;

  int interior_count() const { return static_cast<int>(A_II.rows()); }
  int boundary_count() const { return static_cast<int>(A_BB.size()); }
  // A_II - shift*M as a complex matrix (shift defaults to 0 when absent).
  Eigen::MatrixXcd shifted_interior_matrix() const;
  bool has_real_shift() const { return !shift || shift->imag() == 0.0; }
};

BlockOperator assemble(const grid::Grid& g, const grid::Metric& m, const Potential& q,
                       std::optional<std::complex<double>> shift = std::nullopt);

// Solves the interior Dirichlet problem A u = -A_IB f for the (possibly
// shifted) interior matrix. Throws SingularSystemError when the factorization
// detects the shift sitting on the spectrum.
Eigen::VectorXd apply_dirichlet_solve(const BlockOperator& op, const Eigen::VectorXd& f);
Eigen::VectorXcd apply_dirichlet_solve(const BlockOperator& op, const Eigen::VectorXcd& f);

// Writes A_II, A_IB, A_BB, M, W as "name row col value" coordinate text.
void dump_operator(const BlockOperator& op, const std::string& path);

}  // namespace dtnlab::assembly

#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "dtnlab/assembly.hpp"

namespace dtnlab::eigen {

// Full generalized eigensystem A_II phi = lambda M phi, mass-orthonormal,
// eigenvalues ascending. Clusters partition [0,N) into degeneracy groups
// as half-open index ranges.
struct EigenSystem {
  Eigen::VectorXd lambdas;
  Eigen::MatrixXd phis;  // interior x N, column k is phi_k
  std::vector<std::pair<int, int>> clusters;

  int size() const { return static_cast<int>(lambdas.size()); }
};

// Dense symmetric reduction M^{-1/2} A_II M^{-1/2}; throws EigenSolveError on
// non-convergence rather than truncating the spectrum.
EigenSystem solve_eigensystem(const assembly::BlockOperator& op, double cluster_rtol = 1e-9);

// Same spectrum computed after symmetrically permuting the interior node
// ordering; eigenvectors are mapped back to the original ordering. Exercises
// the gauge freedom inside (near-)degenerate eigenspaces.
EigenSystem solve_eigensystem_permuted(const assembly::BlockOperator& op,
                                       const std::vector<int>& perm, double cluster_rtol = 1e-9);

// Consecutive eigenvalues with |l_{k+1}-l_k| <= rel_tol*max(l_k,1) share a
// cluster. rel_tol must lie in (0, 1e-4].
std::vector<std::pair<int, int>> group_degeneracies(const Eigen::VectorXd& lambdas,
                                                    double rel_tol);

struct WeylFit {
  double slope = 0.0;
  double intercept = 0.0;
  // Smallest c > 1 with c^{-1} k^{2/d} <= lambda_k <= c k^{2/d} on the window.
  double two_sided_constant = 0.0;
  int k_lo = 0, k_hi = 0;  // 1-based inclusive window
};

// Least-squares fit of log lambda_k against log k over the window.
WeylFit weyl_fit(const EigenSystem& es, int dim, int k_lo, int k_hi);

// Default window [max(10, N/50), N/3]: below, pre-asymptotic constants;
// above, grid pollution of the large eigenvalues.
std::pair<int, int> default_fit_window(int n);

}  // namespace dtnlab::eigen

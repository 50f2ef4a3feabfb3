#include "dtnlab/eigensystem.hpp"

#include <algorithm>
#include <cmath>

#include "dtnlab/errors.hpp"

namespace dtnlab::eigen {

using assembly::BlockOperator;

namespace {

EigenSystem finish(Eigen::VectorXd lambdas, Eigen::MatrixXd phis, double cluster_rtol) {
  EigenSystem es;
  es.lambdas = std::move(lambdas);
  es.phis = std::move(phis);
  es.clusters = group_degeneracies(es.lambdas, cluster_rtol);
  return es;
}

}  // namespace

EigenSystem solve_eigensystem(const BlockOperator& op, double cluster_rtol) {
  if (op.shift) throw ConfigError("eigensystem requires the unshifted operator");
  const Eigen::VectorXd s = op.M.cwiseSqrt();
  Eigen::MatrixXd B = op.A_II;
  for (int i = 0; i < B.rows(); ++i)
    for (int j = 0; j < B.cols(); ++j) B(i, j) /= s[i] * s[j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(B);
  if (solver.info() != Eigen::Success)
    throw EigenSolveError("dense symmetric eigensolver did not converge");
  Eigen::MatrixXd phis = solver.eigenvectors();
  for (int i = 0; i < phis.rows(); ++i) phis.row(i) /= s[i];
  return finish(solver.eigenvalues(), std::move(phis), cluster_rtol);
}

EigenSystem solve_eigensystem_permuted(const BlockOperator& op, const std::vector<int>& perm,
                                       double cluster_rtol) {
  if (op.shift) throw ConfigError("eigensystem requires the unshifted operator");
  const int n = op.interior_count();
  if (static_cast<int>(perm.size()) != n) throw ConfigError("permutation has wrong length");
  std::vector<char> seen(n, 0);
  for (int p : perm) {
    if (p < 0 || p >= n || seen[p]) throw ConfigError("not a permutation of interior indices");
    seen[p] = 1;
  }

  const Eigen::VectorXd s = op.M.cwiseSqrt();
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      B(i, j) = op.A_II(perm[i], perm[j]) / (s[perm[i]] * s[perm[j]]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(B);
  if (solver.info() != Eigen::Success)
    throw EigenSolveError("dense symmetric eigensolver did not converge");
  const Eigen::MatrixXd& v = solver.eigenvectors();
  Eigen::MatrixXd phis(n, n);
  for (int i = 0; i < n; ++i) phis.row(perm[i]) = v.row(i) / s[perm[i]];
  return finish(solver.eigenvalues(), std::move(phis), cluster_rtol);
}

std::vector<std::pair<int, int>> group_degeneracies(const Eigen::VectorXd& lambdas,
                                                    double rel_tol) {
  if (!(rel_tol > 0.0) || rel_tol > 1e-4)
    throw ConfigError("degeneracy rel_tol must lie in (0, 1e-4]");
  std::vector<std::pair<int, int>> clusters;
  const int n = static_cast<int>(lambdas.size());
  int start = 0;
  for (int k = 0; k + 1 < n; ++k) {
    if (std::abs(lambdas[k + 1] - lambdas[k]) > rel_tol * std::max(lambdas[k], 1.0)) {
      clusters.emplace_back(start, k + 1);
      start = k + 1;
    }
  }
  if (n > 0) clusters.emplace_back(start, n);
  return clusters;
}

WeylFit weyl_fit(const EigenSystem& es, int dim, int k_lo, int k_hi) {
  const int n = es.size();
  if (k_lo < 1 || k_hi > n || k_hi - k_lo + 1 < 10)
    throw ConfigError("weyl fit window too small (need at least 10 points)");
  const int m = k_hi - k_lo + 1;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double c2 = 1.0;
  const double expo = 2.0 / dim;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double lx = std::log(static_cast<double>(k));
    const double ly = std::log(es.lambdas[k - 1]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    const double ratio = es.lambdas[k - 1] / std::pow(static_cast<double>(k), expo);
    c2 = std::max(c2, std::max(ratio, 1.0 / ratio));
  }
  WeylFit fit;
  fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / m;
  fit.two_sided_constant = c2;
  fit.k_lo = k_lo;
  fit.k_hi = k_hi;
  return fit;
}

std::pair<int, int> default_fit_window(int n) {
  const int lo = std::max(10, n / 50);
  const int hi = std::max(lo + 9, n / 3);
  return {lo, hi};
}

}  // namespace dtnlab::eigen

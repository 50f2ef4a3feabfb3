#include "dtnlab/spectral.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <utility>

#include "dtnlab/errors.hpp"

namespace dtnlab::spectral {

namespace {

// Least-squares slope of y against x.
double ls_slope(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double xm = x.mean();
  const double ym = y.mean();
  const Eigen::VectorXd dx = x.array() - xm;
  const Eigen::VectorXd dy = y.array() - ym;
  const double den = dx.squaredNorm();
  if (den <= 0.0) throw ConfigError("slope fit needs at least two distinct abscissae");
  return dx.dot(dy) / den;
}

// Partition that breaks between k and k+1 only where BOTH spectra have a
// relative gap larger than rtol. Using one shared partition guarantees the
// cluster boundaries of the two datasets match, which per-dataset grouping
// does not once a perturbation splits a near-degenerate pair unevenly.
std::vector<std::pair<int, int>> joint_partition(const Eigen::VectorXd& a,
                                                 const Eigen::VectorXd& b, double rtol) {
  std::vector<std::pair<int, int>> out;
  const int n = static_cast<int>(a.size());
  int start = 0;
  for (int k = 0; k + 1 < n; ++k) {
    const bool gap_a = std::abs(a[k + 1] - a[k]) > rtol * std::max(std::abs(a[k]), 1.0);
    const bool gap_b = std::abs(b[k + 1] - b[k]) > rtol * std::max(std::abs(b[k]), 1.0);
    if (gap_a && gap_b) {
      out.emplace_back(start, k + 1);
      start = k + 1;
    }
  }
  if (n > 0) out.emplace_back(start, n);
  return out;
}

}  // namespace

double SpectralBoundaryData::boundary_norm(const Eigen::VectorXd& v) const {
  return std::sqrt(v.dot(weights.cwiseProduct(v)));
}

double SpectralBoundaryData::boundary_inner(const Eigen::VectorXd& a,
                                            const Eigen::VectorXd& b) const {
  return a.dot(weights.cwiseProduct(b));
}

SpectralBoundaryData boundary_flux(const assembly::BlockOperator& op,
                                   const eigen::EigenSystem& es, double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 0.5))
    throw ConfigError("epsilon must lie in (0, 1/2)");
  if (es.phis.rows() != op.interior_count())
    throw ConfigError("eigensystem does not match operator interior size");

  SpectralBoundaryData data;
  data.lambdas = es.lambdas;
  data.weights = op.W;
  data.clusters = es.clusters;
  data.epsilon = epsilon;
  data.dim = op.dim;
  data.psis = op.A_IB.transpose() * es.phis;
  for (int b = 0; b < data.psis.rows(); ++b) data.psis.row(b) /= op.W(b);

  for (int k = 0; k < data.size(); ++k) {
    if (data.boundary_norm(data.psis.col(k)) <= 1e-12)
      throw EigenSolveError("eigenfunction " + std::to_string(k) +
                            " has vanishing boundary flux");
  }
  return data;
}

AlignOutcome align_gauge(const SpectralBoundaryData& reference, SpectralBoundaryData moving,
                         double cluster_rtol, Eigen::MatrixXd* phis_moving) {
  if (reference.size() != moving.size() || reference.psis.rows() != moving.psis.rows())
    throw ConfigError("datasets must share grid and spectrum size to align");
  if (!(cluster_rtol > 0.0) || !(cluster_rtol < 1.0))
    throw ConfigError("cluster_rtol must lie in (0, 1)");
  if (phis_moving && phis_moving->cols() != moving.size())
    throw ConfigError("interior eigenvector block does not match spectrum size");

  AlignOutcome out;
  out.joint = joint_partition(reference.lambdas, moving.lambdas, cluster_rtol);

  const Eigen::VectorXd& w = reference.weights;
  for (const auto& [lo, hi] : out.joint) {
    const int m = hi - lo;
    if (m == 1) {
      const double c = reference.boundary_inner(moving.psis.col(lo), reference.psis.col(lo));
      if (c < 0.0) {
        moving.psis.col(lo) *= -1.0;
        if (phis_moving) phis_moving->col(lo) *= -1.0;
        ++out.rotated_clusters;
      }
      continue;
    }
    // Weighted orthogonal Procrustes on the cluster block: the orthogonal R
    // maximizing tr(R^T C) with C = Psi_moving^T diag(w) Psi_ref is U V^T.
    const Eigen::MatrixXd block_m = moving.psis.middleCols(lo, m);
    const Eigen::MatrixXd block_r = reference.psis.middleCols(lo, m);
    const Eigen::MatrixXd C = block_m.transpose() * w.asDiagonal() * block_r;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd R = svd.matrixU() * svd.matrixV().transpose();
    const Eigen::MatrixXd rotated = block_m * R;
    // When the cluster holds more modes than boundary nodes, C is rank
    // deficient and the SVD pads R with noise rotations of its null space.
    // Those move coefficients, not columns; a column change at rounding level
    // is therefore noise, and applying it would smear bitwise-equal inputs.
    if ((rotated - block_m).norm() <= 1e-12 * block_m.norm()) continue;
    moving.psis.middleCols(lo, m) = rotated;
    if (phis_moving)
      phis_moving->middleCols(lo, m) = phis_moving->middleCols(lo, m) * R;
    if ((R - Eigen::MatrixXd::Identity(m, m)).norm() > 1e-10) ++out.rotated_clusters;
  }

  out.aligned = std::move(moving);
  return out;
}

std::pair<double, double> weights_alpha_beta(int k, double epsilon, int dim) {
  if (k < 1) throw ConfigError("spectral index k is 1-based");
  if (!(epsilon > 0.0) || !(epsilon < 0.5))
    throw ConfigError("epsilon must lie in (0, 1/2)");
  if (dim != 1 && dim != 2) throw ConfigError("dimension must be 1 or 2");
  const double alpha = std::pow(k, -(1.0 - 2.0 * epsilon) / (2.0 * dim));
  const double beta = std::pow(k, (1.0 + 2.0 * epsilon) / dim);
  return {alpha, beta};
}

DistanceReport distance(const SpectralBoundaryData& a, const SpectralBoundaryData& b,
                        int tail_from) {
  const int n = a.size();
  if (b.size() != n || a.psis.rows() != b.psis.rows())
    throw ConfigError("datasets must share grid and spectrum size");
  if (tail_from < 1 || tail_from > n)
    throw ConfigError("tail_from must lie in [1, N]");

  DistanceReport rep;
  rep.tail_from = tail_from;
  rep.per_k.reserve(n);
  for (int k = 0; k < n; ++k) {
    const auto [alpha, beta] = weights_alpha_beta(k + 1, a.epsilon, a.dim);
    const double dlam = std::abs(b.lambdas(k) - a.lambdas(k));
    const double dpsi = a.boundary_norm(b.psis.col(k) - a.psis.col(k));
    rep.per_k.push_back({k + 1, alpha * alpha * dlam, alpha * dpsi, beta * dlam});
    if (k + 1 >= tail_from) {
      rep.D += alpha * alpha * dlam + alpha * dpsi;
      rep.D_plus += beta * dlam + alpha * dpsi;
      rep.D_unweighted += dlam + dpsi;
    }
  }
  return rep;
}

GrowthFits growth_diagnostics(const SpectralBoundaryData& data, const eigen::EigenSystem& es,
                              const Eigen::VectorXd& mass, double epsilon, int k_lo, int k_hi) {
  const int n = data.size();
  if (k_lo < 1 || k_hi > n || k_hi - k_lo + 1 < 5)
    throw ConfigError("growth fit window needs at least 5 indices inside [1, N]");

  const int m = k_hi - k_lo + 1;
  Eigen::VectorXd logk(m), log_psi(m), log_lam(m), log_h2(m), log_hs(m);
  for (int i = 0; i < m; ++i) {
    const int k = k_lo - 1 + i;
    logk(i) = std::log(static_cast<double>(k + 1));
    log_psi(i) = std::log(data.boundary_norm(data.psis.col(k)));
    log_lam(i) = std::log(es.lambdas(k));
    log_h2(i) = std::log(spectral_sobolev_norm(es.phis.col(k), es, mass, 2.0));
    log_hs(i) = std::log(spectral_sobolev_norm(es.phis.col(k), es, mass, 1.5 + epsilon));
  }

  GrowthFits fits;
  fits.k_lo = k_lo;
  fits.k_hi = k_hi;
  fits.psi_slope = ls_slope(logk, log_psi);
  fits.h2_slope = ls_slope(log_lam, log_h2);
  fits.hs_slope = ls_slope(log_lam, log_hs);
  return fits;
}

double spectral_sobolev_norm(const Eigen::VectorXd& v, const eigen::EigenSystem& es,
                             const Eigen::VectorXd& mass, double s) {
  if (!(s >= 0.0) || s > 2.0) throw ConfigError("Sobolev order s must lie in [0, 2]");
  if (v.size() != es.phis.rows() || mass.size() != v.size())
    throw ConfigError("vector length does not match eigensystem");
  const Eigen::VectorXd coeffs = es.phis.transpose() * mass.cwiseProduct(v);
  double acc = 0.0;
  for (int k = 0; k < es.size(); ++k)
    acc += std::pow(1.0 + es.lambdas(k), s) * coeffs(k) * coeffs(k);
  return std::sqrt(acc);
}

}  // namespace dtnlab::spectral

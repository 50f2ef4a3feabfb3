#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "dtnlab/assembly.hpp"
#include "dtnlab/eigensystem.hpp"

namespace dtnlab::spectral {

// Boundary spectral data (lambda_k, psi_k): psi_k is the discrete Neumann
// trace of phi_k, sampled on boundary nodes, with the boundary quadrature
// weights that define the L2(boundary) inner product.
struct SpectralBoundaryData {
  Eigen::VectorXd lambdas;
  Eigen::MatrixXd psis;  // boundary x N, column k is psi_k
  Eigen::VectorXd weights;
  std::vector<std::pair<int, int>> clusters;
  double epsilon = 0.1;
  int dim = 2;

  int size() const { return static_cast<int>(lambdas.size()); }
  double boundary_norm(const Eigen::VectorXd& v) const;
  double boundary_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
};

// psi_k(b) = (A_BI phi_k)(b) / w_b. This choice makes the Green coefficient
// identity (u|phi_k)_M = -<f|psi_k>/lambda_k exact to rounding, because
// phi_k^T A_IB f = lambda_k (u|phi_k)_M holds by construction.
SpectralBoundaryData boundary_flux(const assembly::BlockOperator& op,
                                   const eigen::EigenSystem& es, double epsilon);

struct AlignOutcome {
  SpectralBoundaryData aligned;            // the second dataset, gauge-aligned
  std::vector<std::pair<int, int>> joint;  // partition used for the alignment
  int rotated_clusters = 0;                // clusters of size > 1 that got a rotation
};

// Aligns the gauge of `moving` onto `reference`: per joint cluster, the best
// orthogonal rotation of the psi block under the weighted boundary inner
// product (orthogonal Procrustes); a singleton cluster degenerates to the
// sign flip psi_k <- -psi_k when <psi_k|psi_tilde_k> < 0. The joint partition
// breaks between k and k+1 only where BOTH spectra have a relative gap larger
// than cluster_rtol, so the two partitions match by construction. If
// `phis_moving` is given, the same rotations are applied to its columns.
AlignOutcome align_gauge(const SpectralBoundaryData& reference, SpectralBoundaryData moving,
                         double cluster_rtol, Eigen::MatrixXd* phis_moving = nullptr);

// alpha_k = k^{-(1-2 eps)/(2 dim)}, beta_k = k^{(1+2 eps)/dim}.
std::pair<double, double> weights_alpha_beta(int k, double epsilon, int dim);

struct DistanceReport {
  double D = 0.0;            // sum alpha^2 |dlambda| + alpha ||dpsi||
  double D_plus = 0.0;       // beta on the eigenvalue sum
  double D_unweighted = 0.0; // all weights 1
  int tail_from = 1;         // sums restricted to k >= tail_from (1-based)
  struct Row {
    int k;
    double alpha2_dlambda, alpha_dpsi, beta_dlambda;
  };
  std::vector<Row> per_k;  // always the full range, independent of tail_from
};

// Distances between gauge-aligned datasets.
DistanceReport distance(const SpectralBoundaryData& a, const SpectralBoundaryData& b,
                        int tail_from = 1);

struct GrowthFits {
  double psi_slope = 0.0;   // log ||psi_k|| vs log k
  double h2_slope = 0.0;    // log ||phi_k||_{H^2} vs log lambda_k
  double hs_slope = 0.0;    // log ||phi_k||_{H^{3/2+eps}} vs log lambda_k
  int k_lo = 0, k_hi = 0;
};

GrowthFits growth_diagnostics(const SpectralBoundaryData& data, const eigen::EigenSystem& es,
                              const Eigen::VectorXd& mass, double epsilon, int k_lo, int k_hi);

// ||v||_{H^s} = (sum_k (1+lambda_k)^s |(v|phi_k)_M|^2)^{1/2}, s in [0,2].
double spectral_sobolev_norm(const Eigen::VectorXd& v, const eigen::EigenSystem& es,
                             const Eigen::VectorXd& mass, double s);

}  // namespace dtnlab::spectral

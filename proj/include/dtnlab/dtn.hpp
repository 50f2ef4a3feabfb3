#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string>

#include "dtnlab/assembly.hpp"
#include "dtnlab/eigensystem.hpp"
#include "dtnlab/spectral.hpp"

namespace dtnlab::dtn {

// Dirichlet-to-Neumann matrix in the weighted boundary frame: the map acts on
// boundary data f as entries * f, and the W-weighted inner product gives the
// associated quadratic form.
struct DtnMatrix {
  Eigen::MatrixXcd entries;
  Eigen::VectorXd weights;
  std::optional<std::complex<double>> shift;
  std::string provenance;

  int size() const { return static_cast<int>(entries.rows()); }
};

// Schur complement Lambda = W^{-1} (A_BB - A_BI (A_II - shift M)^{-1} A_IB),
// with the shift taken from the operator (absent means zero). Real shifts are
// factored in real arithmetic.
DtnMatrix dtn_direct(const assembly::BlockOperator& op);

struct SeriesSolution {
  Eigen::VectorXd u;       // interior partial sum over the first K modes
  double parseval = 0.0;   // sum_{k<=K} <f|psi_k>^2 / lambda_k^2
  Eigen::VectorXd coeffs;  // <f|psi_k> for every k, independent of K
};

// Interior Dirichlet solve as a spectral partial sum,
//   u_K = -sum_{k<=K} <f|psi_k>/lambda_k * phi_k.
// At K = N this reproduces apply_dirichlet_solve and the Parseval sum equals
// ||u||_M^2, both to rounding.
SeriesSolution solve_bvp_series(const spectral::SpectralBoundaryData& data,
                                const eigen::EigenSystem& es, const Eigen::VectorXd& f, int K);

// Spectral series for the DtN matrix,
//   entries(b,b') = [local] A_BB(b)/W(b) delta_{bb'}
//                   - sum_{k<=K} psi_k(b) psi_k(b') w(b') / (lambda_k - shift),
// where [local] is present only when include_local is set. At K = N this
// equals dtn_direct for the same shift. Differences of two maps on the same
// grid need no local part: A_BB does not depend on the potential. The shift
// argument is the series shift; the operator only supplies A_BB and W.
DtnMatrix dtn_series(const spectral::SpectralBoundaryData& data, const assembly::BlockOperator& op,
                     int K, bool include_local,
                     std::optional<std::complex<double>> shift = std::nullopt);

struct BoundaryDecomposition {
  Eigen::VectorXd A1, A2, A3;  // boundary vectors, partial sums over k <= ell
};

// Three-term split of (Lambda(q) - Lambda(q~)) f truncated at ell. Writing
// a_k = <f|psi_k>, a~_k = <f|psi~_k>:
//   A1 = sum_k (1/lambda~_k - 1/lambda_k) a~_k psi~_k
//   A2 = sum_k (a~_k - a_k) / lambda_k   psi~_k
//   A3 = sum_k a_k / lambda_k            (psi~_k - psi_k)
// with plain quantities from `data` and tilde quantities from `data_t`. The
// sum telescopes: at ell = N, A1 + A2 + A3 = (Lambda(q) - Lambda(q~)) f
// exactly. Meaningful output requires the datasets to be gauge aligned first.
BoundaryDecomposition decompose_boundary(const spectral::SpectralBoundaryData& data,
                                         const spectral::SpectralBoundaryData& data_t,
                                         const Eigen::VectorXd& f, int ell);

struct InteriorDecomposition {
  Eigen::VectorXd w1, w2, w3;  // interior vectors, partial sums over k <= ell
};

// Interior counterpart of the split above: each trailing psi factor is
// replaced by the interior eigenvector it is the trace of. Because A_BI does
// not depend on the potential, the discrete Neumann trace W^{-1} A_BI w_i
// reproduces the matching boundary term A_i exactly, term by term.
InteriorDecomposition decompose_interior(const eigen::EigenSystem& es,
                                         const eigen::EigenSystem& es_t,
                                         const spectral::SpectralBoundaryData& data,
                                         const spectral::SpectralBoundaryData& data_t,
                                         const Eigen::VectorXd& f, int ell);

// Discrete Neumann trace of an interior vector: (A_BI v) / W.
Eigen::VectorXd neumann_trace(const assembly::BlockOperator& op, const Eigen::VectorXd& v);

// Boundary deficit tau(u) - tau(u_mu) between the unshifted interior solution
// and the mu-shifted one, as the series
//   -sum_k mu <f|psi_k> / (lambda_k (lambda_k + mu)) psi_k,  mu > 0.
// Matches the two-solve difference W^{-1} A_BI (u - u_mu) to rounding.
Eigen::VectorXd resolvent_shift_series(const spectral::SpectralBoundaryData& data,
                                       const Eigen::VectorXd& f, double mu);

// Largest singular value of diag(sqrt w) entries diag(1/sqrt w), i.e. the
// operator norm on the weighted boundary space.
double operator_norm(const DtnMatrix& map);

}  // namespace dtnlab::dtn

#include "dtnlab/dtn.hpp"

#include <Eigen/SVD>

#include <cmath>

#include "dtnlab/errors.hpp"

namespace dtnlab::dtn {

namespace {

using Complex = std::complex<double>;

void require_boundary_data(const spectral::SpectralBoundaryData& data, const Eigen::VectorXd& f) {
  if (f.size() != data.psis.rows()) throw ConfigError("boundary data has wrong length");
}

void require_mode_count(int K, int n, const char* what) {
  if (K < 1 || K > n) throw ConfigError(std::string(what) + " must lie in [1, N]");
}

}  // namespace

DtnMatrix dtn_direct(const assembly::BlockOperator& op) {
  DtnMatrix out;
  out.weights = op.W;
  out.shift = op.shift;
  out.provenance = "schur";

  const int nb = op.boundary_count();
  if (op.has_real_shift()) {
    Eigen::MatrixXd A = op.A_II;
    if (op.shift) A.diagonal() -= op.shift->real() * op.M;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    assembly::detail::check_pivots(lu);
    Eigen::MatrixXd S = -op.A_IB.transpose() * lu.solve(op.A_IB);
    S.diagonal() += op.A_BB;
    out.entries = S.cast<Complex>();
  } else {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(op.shifted_interior_matrix());
    assembly::detail::check_pivots(lu);
    const Eigen::MatrixXcd A_IB = op.A_IB.cast<Complex>();
    Eigen::MatrixXcd S = -A_IB.transpose() * lu.solve(A_IB);
    S.diagonal() += op.A_BB.cast<Complex>();
    out.entries = std::move(S);
  }
  for (int b = 0; b < nb; ++b) out.entries.row(b) /= op.W(b);
  return out;
}

SeriesSolution solve_bvp_series(const spectral::SpectralBoundaryData& data,
                                const eigen::EigenSystem& es, const Eigen::VectorXd& f, int K) {
  require_boundary_data(data, f);
  if (es.size() != data.size()) throw ConfigError("eigensystem does not match boundary data");
  require_mode_count(K, data.size(), "mode count K");

  SeriesSolution out;
  out.coeffs = data.psis.transpose() * data.weights.cwiseProduct(f);
  out.u = Eigen::VectorXd::Zero(es.phis.rows());
  for (int k = 0; k < K; ++k) {
    const double c = out.coeffs(k) / data.lambdas(k);
    out.u -= c * es.phis.col(k);
    out.parseval += c * c;
  }
  return out;
}

DtnMatrix dtn_series(const spectral::SpectralBoundaryData& data, const assembly::BlockOperator& op,
                     int K, bool include_local, std::optional<Complex> shift) {
  if (data.psis.rows() != op.boundary_count())
    throw ConfigError("boundary data does not match operator");
  require_mode_count(K, data.size(), "mode count K");

  const Complex s = shift.value_or(Complex(0.0, 0.0));
  Eigen::VectorXcd inv_gap(K);
  for (int k = 0; k < K; ++k) {
    const Complex gap = Complex(data.lambdas(k), 0.0) - s;
    if (std::abs(gap) <= 1e-12 * std::max(std::abs(data.lambdas(k)), 1.0))
      throw SingularSystemError("series shift coincides with eigenvalue " + std::to_string(k));
    inv_gap(k) = 1.0 / gap;
  }

  const Eigen::MatrixXcd block = data.psis.leftCols(K).cast<Complex>();
  Eigen::MatrixXcd E = -(block * inv_gap.asDiagonal() * block.transpose());
  for (int b = 0; b < E.cols(); ++b) E.col(b) *= data.weights(b);
  if (include_local)
    for (int b = 0; b < E.rows(); ++b) E(b, b) += op.A_BB(b) / op.W(b);

  DtnMatrix out;
  out.entries = std::move(E);
  out.weights = data.weights;
  out.shift = shift;
  out.provenance = "series(K=" + std::to_string(K) + ")";
  return out;
}

BoundaryDecomposition decompose_boundary(const spectral::SpectralBoundaryData& data,
                                         const spectral::SpectralBoundaryData& data_t,
                                         const Eigen::VectorXd& f, int ell) {
  require_boundary_data(data, f);
  if (data_t.size() != data.size() || data_t.psis.rows() != data.psis.rows())
    throw ConfigError("datasets must share grid and spectrum size");
  require_mode_count(ell, data.size(), "truncation ell");

  const Eigen::VectorXd wf = data.weights.cwiseProduct(f);
  const Eigen::VectorXd a = data.psis.transpose() * wf;
  const Eigen::VectorXd a_t = data_t.psis.transpose() * wf;

  const int nb = static_cast<int>(data.psis.rows());
  BoundaryDecomposition out;
  out.A1 = Eigen::VectorXd::Zero(nb);
  out.A2 = Eigen::VectorXd::Zero(nb);
  out.A3 = Eigen::VectorXd::Zero(nb);
  for (int k = 0; k < ell; ++k) {
    out.A1 += (1.0 / data_t.lambdas(k) - 1.0 / data.lambdas(k)) * a_t(k) * data_t.psis.col(k);
    out.A2 += (a_t(k) - a(k)) / data.lambdas(k) * data_t.psis.col(k);
    out.A3 += a(k) / data.lambdas(k) * (data_t.psis.col(k) - data.psis.col(k));
  }
  return out;
}

InteriorDecomposition decompose_interior(const eigen::EigenSystem& es,
                                         const eigen::EigenSystem& es_t,
                                         const spectral::SpectralBoundaryData& data,
                                         const spectral::SpectralBoundaryData& data_t,
                                         const Eigen::VectorXd& f, int ell) {
  require_boundary_data(data, f);
  if (es.size() != data.size() || es_t.size() != data_t.size() || es.size() != es_t.size())
    throw ConfigError("eigensystems do not match boundary data");
  if (es.phis.rows() != es_t.phis.rows())
    throw ConfigError("eigensystems must share the interior grid");
  require_mode_count(ell, data.size(), "truncation ell");

  const Eigen::VectorXd wf = data.weights.cwiseProduct(f);
  const Eigen::VectorXd a = data.psis.transpose() * wf;
  const Eigen::VectorXd a_t = data_t.psis.transpose() * wf;

  const int ni = static_cast<int>(es.phis.rows());
  InteriorDecomposition out;
  out.w1 = Eigen::VectorXd::Zero(ni);
  out.w2 = Eigen::VectorXd::Zero(ni);
  out.w3 = Eigen::VectorXd::Zero(ni);
  for (int k = 0; k < ell; ++k) {
    out.w1 += (1.0 / data_t.lambdas(k) - 1.0 / data.lambdas(k)) * a_t(k) * es_t.phis.col(k);
    out.w2 += (a_t(k) - a(k)) / data.lambdas(k) * es_t.phis.col(k);
    out.w3 += a(k) / data.lambdas(k) * (es_t.phis.col(k) - es.phis.col(k));
  }
  return out;
}

Eigen::VectorXd neumann_trace(const assembly::BlockOperator& op, const Eigen::VectorXd& v) {
  if (v.size() != op.interior_count()) throw ConfigError("interior vector has wrong length");
  return (op.A_IB.transpose() * v).cwiseQuotient(op.W);
}

Eigen::VectorXd resolvent_shift_series(const spectral::SpectralBoundaryData& data,
                                       const Eigen::VectorXd& f, double mu) {
  require_boundary_data(data, f);
  if (!(mu > 0.0)) throw ConfigError("resolvent shift mu must be positive");

  const Eigen::VectorXd a = data.psis.transpose() * data.weights.cwiseProduct(f);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(data.psis.rows());
  for (int k = 0; k < data.size(); ++k) {
    const double lam = data.lambdas(k);
    r -= mu * a(k) / (lam * (lam + mu)) * data.psis.col(k);
  }
  return r;
}

double operator_norm(const DtnMatrix& map) {
  const Eigen::VectorXd root = map.weights.cwiseSqrt();
  Eigen::MatrixXcd S = map.entries;
  for (int b = 0; b < S.rows(); ++b) S.row(b) *= root(b);
  for (int b = 0; b < S.cols(); ++b) S.col(b) /= root(b);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(S);
  return svd.singularValues()(0);
}

}  // namespace dtnlab::dtn

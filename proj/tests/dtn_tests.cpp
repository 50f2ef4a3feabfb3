#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>

#include "dtnlab/assembly.hpp"
#include "dtnlab/dtn.hpp"
#include "dtnlab/eigensystem.hpp"
#include "dtnlab/errors.hpp"
#include "dtnlab/fields.hpp"
#include "dtnlab/grid.hpp"
#include "dtnlab/spectral.hpp"

using namespace dtnlab;

namespace {

struct Solved {
  grid::Grid g;
  assembly::BlockOperator op;
  eigen::EigenSystem es;
  spectral::SpectralBoundaryData data;
};

Solved solve_all(std::uint64_t q_seed) {
  Solved s;
  s.g = grid::build_grid(2, {1.0, 1.37}, {9, 9});
  const auto q = assembly::make_potential(
      s.g, fields::random_smooth(q_seed, 3, {1.0, 1.37}, 2, 2.5, 1.0, 0.5, 4.5), 5.0);
  s.op = assembly::assemble(s.g, grid::constant_metric(s.g), q);
  s.es = eigen::solve_eigensystem(s.op);
  s.data = spectral::boundary_flux(s.op, s.es, 0.1);
  return s;
}

Eigen::VectorXd random_boundary(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd f(n);
  for (int b = 0; b < n; ++b) f[b] = normal(rng);
  return f;
}

}  // namespace

TEST_CASE("the 1d free map is the difference quotient matrix at every resolution") {
  for (int n : {3, 9, 33}) {
    const auto g = grid::build_grid(1, {1.0}, {n});
    const auto q = assembly::make_potential(g, fields::constant_field(0.0), 1.0);
    const auto op = assembly::assemble(g, grid::constant_metric(g), q);
    const auto map = dtn::dtn_direct(op);
    REQUIRE(map.size() == 2);
    Eigen::Matrix2d expected;
    expected << 1.0, -1.0, -1.0, 1.0;
    CHECK((map.entries.real() - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(map.entries.imag().cwiseAbs().maxCoeff() == 0.0);
    CHECK(dtn::operator_norm(map) == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("the full spectral series reproduces the schur complement") {
  const auto s = solve_all(1);
  const auto direct = dtn::dtn_direct(s.op);
  const auto series = dtn::dtn_series(s.data, s.op, s.es.size(), true);
  const double scale = direct.entries.cwiseAbs().maxCoeff();
  CHECK((series.entries - direct.entries).cwiseAbs().maxCoeff() < 1e-10 * scale);
  // The weighted form W Lambda is symmetric.
  const Eigen::MatrixXcd wl = s.op.W.cast<std::complex<double>>().asDiagonal() * direct.entries;
  CHECK((wl - wl.transpose()).cwiseAbs().maxCoeff() < 1e-10 * scale);
}

TEST_CASE("map differences need no local part") {
  const auto a = solve_all(1);
  const auto b = solve_all(2);
  const Eigen::MatrixXcd direct_diff = dtn::dtn_direct(a.op).entries - dtn::dtn_direct(b.op).entries;
  const Eigen::MatrixXcd series_diff = dtn::dtn_series(a.data, a.op, a.es.size(), false).entries -
                                       dtn::dtn_series(b.data, b.op, b.es.size(), false).entries;
  CHECK((series_diff - direct_diff).cwiseAbs().maxCoeff() <
        1e-10 * direct_diff.cwiseAbs().maxCoeff());
}

TEST_CASE("complex shifts agree between series and direct maps") {
  const auto s = solve_all(1);
  const std::complex<double> lam(8.0, 6.0);
  const auto q = assembly::make_potential(
      s.g, fields::random_smooth(1, 3, {1.0, 1.37}, 2, 2.5, 1.0, 0.5, 4.5), 5.0);
  const auto op_shifted = assembly::assemble(s.g, grid::constant_metric(s.g), q, lam);
  const auto direct = dtn::dtn_direct(op_shifted);
  const auto series = dtn::dtn_series(s.data, s.op, s.es.size(), true, lam);
  CHECK((series.entries - direct.entries).cwiseAbs().maxCoeff() <
        1e-10 * direct.entries.cwiseAbs().maxCoeff());
}

TEST_CASE("shifts on the spectrum are rejected as singular") {
  const auto s = solve_all(1);
  CHECK_THROWS_AS(dtn::dtn_series(s.data, s.op, s.es.size(), true, s.data.lambdas[0]),
                  SingularSystemError);
  const auto g = grid::build_grid(1, {1.0}, {3});
  const auto q = assembly::make_potential(g, fields::constant_field(0.0), 1.0);
  const auto op = assembly::assemble(g, grid::constant_metric(g), q, std::complex<double>(8.0, 0.0));
  CHECK_THROWS_AS(dtn::dtn_direct(op), SingularSystemError);
}

TEST_CASE("the spectral solve matches the direct solve at full depth") {
  const auto s = solve_all(3);
  const Eigen::VectorXd f = random_boundary(s.op.boundary_count(), 11);
  const Eigen::VectorXd u = assembly::apply_dirichlet_solve(s.op, f);
  const auto sol = dtn::solve_bvp_series(s.data, s.es, f, s.es.size());
  CHECK((sol.u - u).norm() < 1e-12 * u.norm());
  const double u_mass2 = u.dot(s.op.M.asDiagonal() * u);
  CHECK(sol.parseval == doctest::Approx(u_mass2).epsilon(1e-12));
  // Coefficients cover the whole spectrum even for a shallow partial sum.
  const auto shallow = dtn::solve_bvp_series(s.data, s.es, f, 3);
  CHECK(shallow.coeffs.size() == s.es.size());
  CHECK((shallow.coeffs - sol.coeffs).norm() == 0.0);
  CHECK(shallow.parseval < sol.parseval);
  CHECK_THROWS_AS(dtn::solve_bvp_series(s.data, s.es, f, 0), ConfigError);
  CHECK_THROWS_AS(dtn::solve_bvp_series(s.data, s.es, f, s.es.size() + 1), ConfigError);
}

TEST_CASE("the three-term split telescopes to the map difference at full depth") {
  const auto a = solve_all(1);
  const auto b = solve_all(2);
  const Eigen::VectorXd f = random_boundary(a.op.boundary_count(), 19);
  const Eigen::VectorXd diff_f =
      (dtn::dtn_direct(a.op).entries.real() - dtn::dtn_direct(b.op).entries.real()) * f;
  // Full sums are spectral projections, so no gauge alignment is needed here.
  const auto split = dtn::decompose_boundary(a.data, b.data, f, a.es.size());
  CHECK((split.A1 + split.A2 + split.A3 - diff_f).norm() < 1e-10 * f.norm());
}

TEST_CASE("interior split terms have the boundary terms as neumann traces") {
  const auto a = solve_all(1);
  const auto b = solve_all(2);
  const Eigen::VectorXd f = random_boundary(a.op.boundary_count(), 23);
  const int ell = 7;
  const auto bd = dtn::decompose_boundary(a.data, b.data, f, ell);
  const auto in = dtn::decompose_interior(a.es, b.es, a.data, b.data, f, ell);
  // A_BI and W are potential independent, so either operator gives the trace.
  CHECK((dtn::neumann_trace(a.op, in.w1) - bd.A1).norm() <= 1e-12 * f.norm());
  CHECK((dtn::neumann_trace(a.op, in.w2) - bd.A2).norm() <= 1e-12 * f.norm());
  CHECK((dtn::neumann_trace(b.op, in.w3) - bd.A3).norm() <= 1e-12 * f.norm());
  CHECK_THROWS_AS(dtn::decompose_boundary(a.data, b.data, f, 0), ConfigError);
  CHECK_THROWS_AS(dtn::decompose_boundary(a.data, b.data, f, a.es.size() + 1), ConfigError);
  CHECK_THROWS_AS(dtn::neumann_trace(a.op, Eigen::VectorXd::Zero(3)), ConfigError);
}

TEST_CASE("the shift deficit series matches two interior solves") {
  const auto s = solve_all(4);
  const Eigen::VectorXd f = random_boundary(s.op.boundary_count(), 29);
  const double mu = 40.0;
  const auto q = assembly::make_potential(
      s.g, fields::random_smooth(4, 3, {1.0, 1.37}, 2, 2.5, 1.0, 0.5, 4.5), 5.0);
  const auto op_mu =
      assembly::assemble(s.g, grid::constant_metric(s.g), q, std::complex<double>(-mu, 0.0));
  const Eigen::VectorXd u = assembly::apply_dirichlet_solve(s.op, f);
  const Eigen::VectorXd u_mu = assembly::apply_dirichlet_solve(op_mu, f);
  const Eigen::VectorXd two_solve = dtn::neumann_trace(s.op, u - u_mu);
  const Eigen::VectorXd series = dtn::resolvent_shift_series(s.data, f, mu);
  CHECK((series - two_solve).norm() < 1e-11 * two_solve.norm());
  CHECK_THROWS_AS(dtn::resolvent_shift_series(s.data, f, 0.0), ConfigError);
  CHECK_THROWS_AS(dtn::resolvent_shift_series(s.data, f, -1.0), ConfigError);
}

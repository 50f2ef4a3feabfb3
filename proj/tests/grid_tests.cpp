#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dtnlab/errors.hpp"
#include "dtnlab/grid.hpp"

using namespace dtnlab;

namespace {

grid::Grid unit_square(int n) { return grid::build_grid(2, {1.0, 1.0}, {n, n}); }

}  // namespace

TEST_CASE("lexicographic indexing round-trips through multi_index and coords") {
  const auto g = grid::build_grid(2, {1.0, 1.5}, {5, 4});
  CHECK(g.node_count() == 20);
  CHECK(g.spacing[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(g.spacing[1] == doctest::Approx(0.5).epsilon(1e-14));
  for (int id = 0; id < g.node_count(); ++id) {
    const auto mi = g.multi_index(id);
    CHECK(mi[1] * g.counts[0] + mi[0] == id);
    const auto xy = g.coords(id);
    CHECK(xy[0] == doctest::Approx(mi[0] * 0.25).epsilon(1e-14));
    CHECK(xy[1] == doctest::Approx(mi[1] * 0.5).epsilon(1e-14));
  }
}

TEST_CASE("interior/boundary partition covers every node once and drops corners") {
  const auto g = grid::build_grid(2, {1.0, 1.5}, {5, 4});
  CHECK(g.interior_count() == 6);
  CHECK(g.boundary_count() == 10);
  int corners = 0;
  for (int id = 0; id < g.node_count(); ++id) {
    const bool interior = g.interior_pos[id] >= 0;
    const bool boundary = g.boundary_pos[id] >= 0;
    CHECK(!(interior && boundary));
    if (!interior && !boundary) {
      CHECK(g.is_corner(id));
      ++corners;
    }
  }
  CHECK(corners == 4);
  for (int i = 0; i < g.interior_count(); ++i) CHECK(g.interior_pos[g.interior_ids[i]] == i);
  for (int b = 0; b < g.boundary_count(); ++b) CHECK(g.boundary_pos[g.boundary_ids[b]] == b);
}

TEST_CASE("1d grids have two endpoint boundary nodes with counting measure") {
  const auto g = grid::build_grid(1, {2.0}, {7});
  CHECK(g.interior_count() == 5);
  CHECK(g.boundary_count() == 2);
  for (int id = 0; id < g.node_count(); ++id) CHECK(!g.is_corner(id));
  const auto w = grid::compute_weights(g, grid::constant_metric(g));
  CHECK(w.boundary[0] == 1.0);
  CHECK(w.boundary[1] == 1.0);
  CHECK(w.mass.sum() == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("euclidean unit square weights are uniform") {
  const auto g = unit_square(33);
  const auto w = grid::compute_weights(g, grid::constant_metric(g));
  const double h = 1.0 / 32.0;
  CHECK(w.mass.size() == 31 * 31);
  CHECK(w.mass.minCoeff() == doctest::Approx(h * h).epsilon(1e-14));
  CHECK(w.mass.maxCoeff() == doctest::Approx(h * h).epsilon(1e-14));
  CHECK(w.mass.sum() == doctest::Approx(31.0 * 31.0 / 1024.0).epsilon(1e-13));
  CHECK(w.boundary.size() == 4 * 31);
  CHECK(w.boundary.minCoeff() == doctest::Approx(h).epsilon(1e-14));
  CHECK(w.boundary.maxCoeff() == doctest::Approx(h).epsilon(1e-14));
}

TEST_CASE("total mass approaches the metric volume under refinement") {
  // 2d density equals the conformal factor; the interior node sum misses a
  // boundary band of width h, so the error is first order in h.
  const auto c = [](double x, double y) { return 1.0 + x * y; };
  const double exact = 1.25;
  double err[2];
  const int ns[2] = {17, 33};
  for (int i = 0; i < 2; ++i) {
    const auto g = unit_square(ns[i]);
    const auto m = grid::metric_from_function(g, c);
    err[i] = std::abs(grid::compute_weights(g, m).mass.sum() - exact);
  }
  CHECK(err[1] < 0.7 * err[0]);
}

TEST_CASE("metric density and flux coefficients of a conformal product metric") {
  // 2d with c = 4, base (2, 8): density c*sqrt(b0*b1) = 16, flux along axis a
  // is sqrt(b0*b1)/b_a (the conformal factor cancels in 2d).
  const auto g2 = unit_square(5);
  const auto m2 = grid::constant_metric(g2, 4.0, {2.0, 8.0});
  CHECK(grid::metric_density(g2, m2, 6) == doctest::Approx(16.0).epsilon(1e-14));
  CHECK(grid::flux_coefficient(g2, m2, 6, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(grid::flux_coefficient(g2, m2, 6, 1) == doctest::Approx(0.5).epsilon(1e-14));

  // 1d with c = 9, base 4: density sqrt(c*b) = 6, flux sqrt(b)/(sqrt(c)*b) = 1/6.
  const auto g1 = grid::build_grid(1, {1.0}, {5});
  const auto m1 = grid::constant_metric(g1, 9.0, {4.0, 1.0});
  CHECK(grid::metric_density(g1, m1, 2) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(grid::flux_coefficient(g1, m1, 2, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("boundary weights carry the tangential metric and spacing") {
  const auto g = grid::build_grid(2, {1.0, 2.0}, {5, 5});
  const auto m = grid::constant_metric(g, 1.0, {4.0, 9.0});
  const auto w = grid::compute_weights(g, m);
  for (int b = 0; b < g.boundary_count(); ++b) {
    const auto mi = g.multi_index(g.boundary_ids[b]);
    const bool x_face = mi[0] == 0 || mi[0] == 4;
    // x-faces are tangent to y: sqrt(c*by)*hy = 3*0.5; y-faces: sqrt(c*bx)*hx = 2*0.25.
    const double expected = x_face ? 1.5 : 0.5;
    CHECK(w.boundary[b] == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("invalid grids and metrics are rejected") {
  CHECK_THROWS_AS(grid::build_grid(3, {1.0, 1.0, 1.0}, {5, 5, 5}), ConfigError);
  CHECK_THROWS_AS(grid::build_grid(2, {1.0, 1.0}, {2, 5}), ConfigError);
  CHECK_THROWS_AS(grid::build_grid(2, {1.0, -1.0}, {5, 5}), ConfigError);
  CHECK_THROWS_AS(grid::build_grid(2, {1.0}, {5, 5}), ConfigError);

  const auto g = unit_square(5);
  CHECK_THROWS_AS(grid::constant_metric(g, -1.0), ConfigError);
  CHECK_THROWS_AS(grid::metric_from_values(g, Eigen::VectorXd::Ones(7)), ConfigError);
  Eigen::VectorXd vanishing = Eigen::VectorXd::Ones(g.node_count());
  vanishing[3] = 0.0;
  CHECK_THROWS_AS(grid::metric_from_values(g, vanishing), ConfigError);
  CHECK_THROWS_AS(
      grid::metric_from_values(g, Eigen::VectorXd::Ones(g.node_count()), {0.0, 1.0}),
      ConfigError);
  CHECK_THROWS_AS(grid::compute_weights(unit_square(4), grid::constant_metric(g)), ConfigError);
}

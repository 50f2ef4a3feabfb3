#include "dtnlab/experiments.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dtnlab/assembly.hpp"
#include "dtnlab/dtn.hpp"
#include "dtnlab/eigensystem.hpp"
#include "dtnlab/errors.hpp"
#include "dtnlab/fields.hpp"
#include "dtnlab/grid.hpp"
#include "dtnlab/spectral.hpp"

namespace dtnlab::lab {

namespace {

using assembly::BlockOperator;
using assembly::Potential;
using config::RunConfig;
using report::ExperimentReport;
using spectral::SpectralBoundaryData;
using Complex = std::complex<double>;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

std::string grid_stamp(const grid::Grid& g) {
  std::string s = std::to_string(g.dim) + "d " + std::to_string(g.counts[0]);
  if (g.dim == 2) s += "x" + std::to_string(g.counts[1]);
  return s;
}

ExperimentReport base_report(const RunConfig& cfg, const std::string& stamp) {
  ExperimentReport rep;
  rep.experiment = cfg.experiment;
  rep.config_hash = config::config_hash(cfg);
  rep.seed = cfg.seed;
  rep.grid = stamp;
  return rep;
}

std::string idx(const std::string& base, int i) { return base + "_p" + std::to_string(i); }

// Everything an experiment needs about one potential on one grid.
struct Solved {
  BlockOperator op;
  eigen::EigenSystem es;
  SpectralBoundaryData data;
};

Solved solve_all(const grid::Grid& g, const grid::Metric& m, const Potential& q, double eps) {
  Solved s;
  s.op = assembly::assemble(g, m, q);
  s.es = eigen::solve_eigensystem(s.op);
  s.data = spectral::boundary_flux(s.op, s.es, eps);
  return s;
}

// Perturbation pairs: q is a clipped random cosine field, q~ adds delta times
// an independent unclipped cosine bump, clipped back into [0, aleph]. The pair
// index shifts the seeds so refining the grid resamples the same fields.
struct PotentialPair {
  Potential q, qt;
  double delta = 0.0;
};

PotentialPair pair_on_grid(const grid::Grid& g, const RunConfig& cfg, int index) {
  const double delta = cfg.deltas[static_cast<std::size_t>(index) % cfg.deltas.size()];
  const std::uint64_t base = cfg.seed - 1;
  const auto qf = fields::random_smooth(base + static_cast<std::uint64_t>(index), 3, g.extents,
                                        g.dim, 2.5, 1.0, 0.5, 4.5);
  const auto bump = fields::random_smooth(base + static_cast<std::uint64_t>(index) + 7777, 2,
                                          g.extents, g.dim, 0.0, 1.0, -1e300, 1e300);
  const double aleph = cfg.aleph;
  const fields::Field qtf = [qf, bump, delta, aleph](double x, double y) {
    return std::clamp(qf(x, y) + delta * bump(x, y), 0.0, aleph);
  };
  PotentialPair p;
  p.delta = delta;
  p.q = assembly::make_potential(g, qf, aleph);
  p.qt = assembly::make_potential(g, qtf, aleph);
  if (cfg.collar) {
    // One cell of the base grid, as a physical width, so refined levels zero
    // the same band.
    const std::array<double, 2> width{
        cfg.grid.extents[0] / (cfg.grid.counts[0] - 1),
        cfg.grid.dim == 2 ? cfg.grid.extents[1] / (cfg.grid.counts[1] - 1) : 0.0};
    config::zero_collar(g, p.q, width);
    config::zero_collar(g, p.qt, width);
  }
  return p;
}

Eigen::VectorXd normal_probe(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) f(i) = gauss(rng);
  return f;
}

std::uint64_t probe_seed(const RunConfig& cfg, int group, int j) {
  return cfg.seed + 1000 + 131 * static_cast<std::uint64_t>(group) + static_cast<std::uint64_t>(j);
}

double m_norm(const Eigen::VectorXd& mass, const Eigen::VectorXd& v) {
  return std::sqrt(v.cwiseProduct(mass.cwiseProduct(v)).sum());
}

// Largest relative increase between consecutive entries; <= 0 means the
// sequence never rises.
double max_uptick(const std::vector<double>& v) {
  double worst = -1.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double denom = std::max(std::abs(v[i]), 1e-300);
    worst = std::max(worst, (v[i + 1] - v[i]) / denom);
  }
  return worst;
}

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const int n = static_cast<int>(xs.size());
  if (n < 2) throw ConfigError("log-log fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    if (!(xs[static_cast<std::size_t>(i)] > 0.0) || !(ys[static_cast<std::size_t>(i)] > 0.0))
      throw ConfigError("log-log fit needs positive data");
    const double lx = std::log(xs[static_cast<std::size_t>(i)]);
    const double ly = std::log(ys[static_cast<std::size_t>(i)]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (std::abs(den) < 1e-30) throw ConfigError("log-log fit abscissae are degenerate");
  return (n * sxy - sx * sy) / den;
}

dtn::DtnMatrix map_difference(const dtn::DtnMatrix& a, const dtn::DtnMatrix& b) {
  if (a.size() != b.size()) throw ConfigError("DtN maps live on different boundaries");
  dtn::DtnMatrix d = a;
  d.entries -= b.entries;
  d.provenance = a.provenance + " minus " + b.provenance;
  return d;
}

std::vector<int> truncation_ladder(const std::vector<int>& ks, int n) {
  std::vector<int> ladder = ks;
  if (ladder.empty()) ladder = {1, 2, 5, n / 8, n / 4, n / 2, (3 * n) / 4};
  ladder.push_back(n);
  for (int& k : ladder) k = std::clamp(k, 1, n);
  std::sort(ladder.begin(), ladder.end());
  ladder.erase(std::unique(ladder.begin(), ladder.end()), ladder.end());
  return ladder;
}

std::pair<int, int> resolve_window(const RunConfig& cfg, int n) {
  if (cfg.fit_window[0] > 0 && cfg.fit_window[1] > 0)
    return {cfg.fit_window[0], std::min(cfg.fit_window[1], n)};
  return eigen::default_fit_window(n);
}

// Sign-only gauge alignment. Spectral sums are invariant under sign flips but
// not under Procrustes rotations of merely near-degenerate clusters, so the
// series identities are checked in this gauge.
SpectralBoundaryData sign_align(const SpectralBoundaryData& ref, SpectralBoundaryData moving) {
  for (int k = 0; k < moving.size(); ++k)
    if (ref.boundary_inner(moving.psis.col(k), ref.psis.col(k)) < 0.0) moving.psis.col(k) *= -1.0;
  return moving;
}

}  // namespace

ExperimentReport run_eig(const RunConfig& cfg) {
  Timer timer;
  const grid::Grid g = config::make_grid(cfg.grid);
  const grid::Metric metric = config::make_metric(g, cfg.metric);
  const Potential q = config::make_potential(g, cfg.potential, cfg.aleph, cfg.collar);
  const Solved s = solve_all(g, metric, q, cfg.epsilon);
  const int n = s.es.size();

  ExperimentReport rep = base_report(cfg, grid_stamp(g));
  rep.row_header = {"k", "lambda", "psi_norm"};
  for (int k = 0; k < n; ++k)
    rep.add_row({double(k + 1), s.es.lambdas(k), s.data.boundary_norm(s.data.psis.col(k))});

  const auto [k_lo, k_hi] = resolve_window(cfg, n);
  const eigen::WeylFit wf = eigen::weyl_fit(s.es, g.dim, k_lo, k_hi);
  const spectral::GrowthFits gf =
      spectral::growth_diagnostics(s.data, s.es, s.op.M, cfg.epsilon, k_lo, k_hi);

  const double weyl_lo = g.dim == 2 ? cfg.tol.weyl_lo_2d : cfg.tol.weyl_lo_1d;
  const double weyl_hi = g.dim == 2 ? cfg.tol.weyl_hi_2d : cfg.tol.weyl_hi_1d;
  rep.check("weyl_exponent", wf.slope >= weyl_lo && wf.slope <= weyl_hi, wf.slope, weyl_hi,
            "in [" + std::to_string(weyl_lo) + ", " + std::to_string(weyl_hi) + "]");

  const double trace_bound =
      (3.0 + 2.0 * cfg.epsilon) / (2.0 * g.dim) + cfg.tol.trace_slope_margin;
  rep.check("trace_growth", gf.psi_slope <= trace_bound, gf.psi_slope, trace_bound, "<=");

  const Eigen::MatrixXd gram =
      s.es.phis.transpose() * s.op.M.asDiagonal() * s.es.phis -
      Eigen::MatrixXd::Identity(n, n);
  rep.check("mass_orthonormal", gram.cwiseAbs().maxCoeff() <= 1e-10, gram.cwiseAbs().maxCoeff(),
            1e-10, "<=");

  const Eigen::MatrixXd resid = s.op.A_II * s.es.phis -
                                s.op.M.asDiagonal() * s.es.phis * s.es.lambdas.asDiagonal();
  double worst_resid = 0.0;
  for (int k = 0; k < n; ++k)
    worst_resid = std::max(worst_resid, resid.col(k).norm() / s.es.lambdas(k));
  rep.check("eigen_residual", worst_resid <= 1e-8, worst_resid, 1e-8, "<=");

  rep.metrics["weyl_slope"] = wf.slope;
  rep.metrics["weyl_two_sided_constant"] = wf.two_sided_constant;
  rep.metrics["psi_slope"] = gf.psi_slope;
  rep.metrics["h2_slope"] = gf.h2_slope;
  rep.metrics["hs_slope"] = gf.hs_slope;
  rep.metrics["lambda_min"] = s.es.lambdas(0);
  rep.metrics["lambda_max"] = s.es.lambdas(n - 1);
  rep.metrics["modes"] = n;
  rep.elapsed_ms = timer.ms();
  return rep;
}

ExperimentReport run_dtn(const RunConfig& cfg) {
  Timer timer;
  const grid::Grid g = config::make_grid(cfg.grid);
  const grid::Metric metric = config::make_metric(g, cfg.metric);
  const Potential q = config::make_potential(g, cfg.potential, cfg.aleph, cfg.collar);
  const Solved s = solve_all(g, metric, q, cfg.epsilon);

  const dtn::DtnMatrix direct = dtn::dtn_direct(s.op);
  const dtn::DtnMatrix series = dtn::dtn_series(s.data, s.op, s.es.size(), true);
  const int nb = direct.size();

  ExperimentReport rep = base_report(cfg, grid_stamp(g));
  rep.row_header = {"row", "col", "re", "im"};
  for (int b = 0; b < nb; ++b)
    for (int c = 0; c < nb; ++c)
      rep.add_row({double(b), double(c), direct.entries(b, c).real(), direct.entries(b, c).imag()});

  const double scale = std::max(1.0, direct.entries.cwiseAbs().maxCoeff());
  const double series_err = (direct.entries - series.entries).cwiseAbs().maxCoeff() / scale;
  rep.check("series_matches_direct", series_err <= cfg.tol.exactness, series_err,
            cfg.tol.exactness, "<=");

  // The weighted form W Lambda is the Schur complement itself, hence symmetric.
  const Eigen::MatrixXd weighted = direct.weights.asDiagonal() * direct.entries.real();
  const double sym = (weighted - weighted.transpose()).cwiseAbs().maxCoeff() /
                     std::max(1.0, weighted.cwiseAbs().maxCoeff());
  rep.check("weighted_symmetry", sym <= cfg.tol.exactness, sym, cfg.tol.exactness, "<=");

  double local_max = 0.0;
  for (int b = 0; b < nb; ++b) local_max = std::max(local_max, s.op.A_BB(b) / s.op.W(b));
  rep.metrics["operator_norm"] = dtn::operator_norm(direct);
  rep.metrics["local_diag_max"] = local_max;
  rep.metrics["boundary_nodes"] = nb;
  rep.elapsed_ms = timer.ms();
  return rep;
}

ExperimentReport run_distance(const RunConfig& cfg) {
  Timer timer;
  const grid::Grid g = config::make_grid(cfg.grid);
  const grid::Metric metric = config::make_metric(g, cfg.metric);
  const Potential q = config::make_potential(g, cfg.potential, cfg.aleph, cfg.collar);
  const config::PotentialSpec& tilde_spec = cfg.has_tilde ? cfg.potential_tilde : cfg.potential;
  const Potential qt = config::make_potential(g, tilde_spec, cfg.aleph, cfg.collar);

  const Solved a = solve_all(g, metric, q, cfg.epsilon);
  const Solved b = solve_all(g, metric, qt, cfg.epsilon);
  const spectral::AlignOutcome align = spectral::align_gauge(a.data, b.data, cfg.cluster_rtol);
  const spectral::DistanceReport full = spectral::distance(a.data, align.aligned, 1);
  const spectral::DistanceReport tail = spectral::distance(a.data, align.aligned, cfg.ell);
  const double qdiff = m_norm(a.op.M, q.values - qt.values);

  ExperimentReport rep = base_report(cfg, grid_stamp(g));
  rep.row_header = {"k", "alpha2_dlambda", "alpha_dpsi", "beta_dlambda"};
  for (const auto& row : full.per_k)
    rep.add_row({double(row.k), row.alpha2_dlambda, row.alpha_dpsi, row.beta_dlambda});

  rep.check("ordered_dominance", full.D <= full.D_plus, full.D, full.D_plus, "<=");
  const bool separated = qdiff >= cfg.tol.qdiff_floor;
  rep.check("separation_detected", separated ? full.D >= cfg.tol.tail_floor : full.D <= 1e-8,
            full.D, separated ? cfg.tol.tail_floor : 1e-8,
            separated ? ">= (potentials distinct)" : "<= (potentials identical)");

  rep.metrics["D"] = full.D;
  rep.metrics["D_plus"] = full.D_plus;
  rep.metrics["D_unweighted"] = full.D_unweighted;
  rep.metrics["D_tail"] = tail.D;
  rep.metrics["qdiff"] = qdiff;
  rep.metrics["joint_clusters"] = static_cast<double>(align.joint.size());
  rep.metrics["rotated_clusters"] = align.rotated_clusters;
  rep.elapsed_ms = timer.ms();
  return rep;
}

ExperimentReport run_lemma_identity(const RunConfig& cfg) {
  Timer timer;
  const grid::Grid g = config::make_grid(cfg.grid);
  const grid::Metric metric = config::make_metric(g, cfg.metric);

  ExperimentReport rep = base_report(cfg, grid_stamp(g));
  rep.row_header = {"sample", "probe", "series_residual", "parseval_residual", "coeff_residual"};

  double worst_series = 0.0, worst_parseval = 0.0, worst_coeff = 0.0, worst_uptick = -1.0;
  for (int sidx = 0; sidx < cfg.samples; ++sidx) {
    config::PotentialSpec ps = cfg.potential;
    ps.seed = cfg.potential.seed + static_cast<std::uint64_t>(sidx);
    const Potential q = config::make_potential(g, ps, cfg.aleph, cfg.collar);
    const Solved s = solve_all(g, metric, q, cfg.epsilon);
    const int n = s.es.size();
    const std::vector<int> ladder = truncation_ladder(cfg.Ks, n);

    for (int j = 0; j < cfg.probes; ++j) {
      const Eigen::VectorXd f = normal_probe(probe_seed(cfg, sidx, j), s.op.boundary_count());
      const Eigen::VectorXd u = assembly::apply_dirichlet_solve(s.op, f);
      const double un = m_norm(s.op.M, u);
      const dtn::SeriesSolution sol = dtn::solve_bvp_series(s.data, s.es, f, n);

      const double series_res = m_norm(s.op.M, sol.u - u) / un;
      const double parseval_res = std::abs(sol.parseval - un * un) / (un * un);
      const Eigen::VectorXd c = s.es.phis.transpose() * s.op.M.cwiseProduct(u);
      const Eigen::VectorXd viol = s.es.lambdas.cwiseProduct(c) + sol.coeffs;
      const double coeff_res =
          viol.cwiseAbs().maxCoeff() / std::max(sol.coeffs.cwiseAbs().maxCoeff(), 1e-300);

      rep.add_row({double(sidx), double(j), series_res, parseval_res, coeff_res});
      worst_series = std::max(worst_series, series_res);
      worst_parseval = std::max(worst_parseval, parseval_res);
      worst_coeff = std::max(worst_coeff, coeff_res);

      if (j == 0) {
        std::vector<double> errs;
        for (int K : ladder) errs.push_back(m_norm(s.op.M, dtn::solve_bvp_series(s.data, s.es, f, K).u - u));
        worst_uptick = std::max(worst_uptick, max_uptick(errs));
      }
    }
  }

  rep.check("series_matches_direct", worst_series <= cfg.tol.exactness, worst_series,
            cfg.tol.exactness, "<=");
  rep.check("parseval_identity", worst_parseval <= cfg.tol.exactness, worst_parseval,
            cfg.tol.exactness, "<=");
  rep.check("coefficient_identity", worst_coeff <= cfg.tol.exactness, worst_coeff,
            cfg.tol.exactness, "<=");
  rep.check("partial_sum_monotone", worst_uptick <= 1e-12, worst_uptick, 1e-12, "<=");

  rep.metrics["samples"] = cfg.samples;
  rep.metrics["probes"] = cfg.probes;
  rep.elapsed_ms = timer.ms();
  return rep;
}

ExperimentReport run_stability_sweep(const RunConfig& cfg) {
  Timer timer;
  ExperimentReport rep = base_report(cfg, "");

  rep.row_header = {"level", "pair", "delta", "qdiff", "D", "D_plus", "dtn_diff_norm", "ratio"};

  std::array<double, 2> max_ratio{0.0, 0.0};
  std::map<double, std::pair<double, int>> by_delta;  // coarse grid only
  double min_qdiff = std::numeric_limits<double>::infinity();
  double min_distance = std::numeric_limits<double>::infinity();
  std::string stamp;

  for (int level = 0; level < 2; ++level) {
    config::GridSpec gs = cfg.grid;
    if (level == 1) gs.counts = cfg.refine_counts;
    const grid::Grid g = config::make_grid(gs);
    const grid::Metric metric = config::make_metric(g, cfg.metric);
    stamp = level == 0 ? grid_stamp(g) : stamp + " / " + grid_stamp(g);

    for (int i = 0; i < cfg.pair_count; ++i) {
      const PotentialPair pair = pair_on_grid(g, cfg, i);
      const Solved a = solve_all(g, metric, pair.q, cfg.epsilon);
      const Solved b = solve_all(g, metric, pair.qt, cfg.epsilon);
      const spectral::AlignOutcome align = spectral::align_gauge(a.data, b.data, cfg.cluster_rtol);
      const spectral::DistanceReport dist = spectral::distance(a.data, align.aligned, 1);
      const double lnorm = dtn::operator_norm(map_difference(dtn::dtn_direct(a.op), dtn::dtn_direct(b.op)));
      const double qdiff = m_norm(a.op.M, pair.q.values - pair.qt.values);

      if (dist.D == 0.0 && lnorm > cfg.tol.exactness)
        throw Error("stability violated: zero spectral distance against a nonzero DtN difference");
      const double ratio = dist.D > 0.0 ? lnorm / dist.D : 0.0;
      rep.add_row({double(level), double(i), pair.delta, qdiff, dist.D, dist.D_plus, lnorm, ratio});

      max_ratio[static_cast<std::size_t>(level)] =
          std::max(max_ratio[static_cast<std::size_t>(level)], ratio);
      min_qdiff = std::min(min_qdiff, qdiff);
      min_distance = std::min(min_distance, dist.D);
      if (level == 0) {
        auto& acc = by_delta[pair.delta];
        acc.first += ratio;
        acc.second += 1;
      }
    }

    if (level == 0) {
      // Identical pair: assembled and solved twice from the same description.
      const Potential q = pair_on_grid(g, cfg, 0).q;
      const Solved a = solve_all(g, metric, q, cfg.epsilon);
      const Solved b = solve_all(g, metric, q, cfg.epsilon);
      const spectral::AlignOutcome align = spectral::align_gauge(a.data, b.data, cfg.cluster_rtol);
      const spectral::DistanceReport dist = spectral::distance(a.data, align.aligned, 1);
      const double lnorm = dtn::operator_norm(map_difference(dtn::dtn_direct(a.op), dtn::dtn_direct(b.op)));
      rep.add_row({0.0, -1.0, 0.0, 0.0, dist.D, dist.D_plus, lnorm, 0.0});
      rep.check("identical_pair_flat", lnorm <= cfg.tol.exactness, lnorm, cfg.tol.exactness, "<=");
      rep.metrics["identical_distance"] = dist.D;
      rep.metrics["identical_dtn_diff"] = lnorm;
    }
  }

  rep.grid = stamp;
  rep.check("pairs_separated", min_qdiff >= cfg.tol.qdiff_floor, min_qdiff, cfg.tol.qdiff_floor,
            ">=");
  rep.check("distances_positive", min_distance >= cfg.tol.tail_floor, min_distance,
            cfg.tol.tail_floor, ">=");

  double mean_lo = std::numeric_limits<double>::infinity(), mean_hi = 0.0;
  for (const auto& [delta, acc] : by_delta) {
    const double mean = acc.first / acc.second;
    mean_lo = std::min(mean_lo, mean);
    mean_hi = std::max(mean_hi, mean);
  }
  const double band = mean_lo > 0.0 ? mean_hi / mean_lo : std::numeric_limits<double>::infinity();
  rep.check("delta_band", band <= 3.0, band, 3.0, "<= (spread of per-delta mean ratios)");

  const double drift = max_ratio[1] / std::max(max_ratio[0], 1e-300);
  const double drift_sym = std::max(drift, 1.0 / std::max(drift, 1e-300));
  rep.check("refinement_drift", drift_sym <= cfg.tol.drift_band, drift_sym, cfg.tol.drift_band,
            "<= (either direction)");

  rep.metrics["max_ratio_coarse"] = max_ratio[0];
  rep.metrics["max_ratio_fine"] = max_ratio[1];
  rep.metrics["drift"] = drift;
  rep.elapsed_ms = timer.ms();
  return rep;
}

ExperimentReport run_resolvent_limit(const RunConfig& cfg) {
  Timer timer;
  const grid::Grid g = config::make_grid(cfg.grid);
  const grid::Metric metric = config::make_metric(g, cfg.metric);
  const std::vector<double> mus = config::sweep_points(cfg.mu);

  ExperimentReport rep = base_report(cfg, grid_stamp(g));
  rep.row_header = {"pair", "mu", "e5", "e6", "e7", "oracle_shift", "oracle_remainder",
                    "split_residual"};

  double lambda_max = 0.0;
  for (int i = 0; i < cfg.pair_count; ++i) {
    const PotentialPair pair = pair_on_grid(g, cfg, i);
    const Solved a = solve_all(g, metric, pair.q, cfg.epsilon);
    const Solved b0 = solve_all(g, metric, pair.qt, cfg.epsilon);
    const SpectralBoundaryData dt = sign_align(a.data, b0.data);
    const SpectralBoundaryData& d = a.data;

    const Eigen::VectorXd f = normal_probe(probe_seed(cfg, i, 0), a.op.boundary_count());
    const double bnf = d.boundary_norm(f);
    const Eigen::VectorXd wf = d.weights.cwiseProduct(f);
    // Series terms of tau(u): t_k psi_k with t_k = -<f|psi_k>/lambda_k.
    const Eigen::VectorXd t = (-(d.psis.transpose() * wf).array() / d.lambdas.array()).matrix();
    const Eigen::VectorXd tt = (-(dt.psis.transpose() * wf).array() / dt.lambdas.array()).matrix();

    const Eigen::VectorXd u = assembly::apply_dirichlet_solve(a.op, f);
    const Eigen::VectorXd ut = assembly::apply_dirichlet_solve(b0.op, f);
    lambda_max = std::max({lambda_max, d.lambdas(d.size() - 1), dt.lambdas(dt.size() - 1)});

    std::vector<double> e5s, e7s;
    double worst_shift = 0.0, worst_rem = 0.0, worst_split = 0.0;
    for (double mu : mus) {
      const Eigen::ArrayXd cmu = mu / (mu + d.lambdas.array());
      const Eigen::ArrayXd cmut = mu / (mu + dt.lambdas.array());
      const Eigen::VectorXd e5_vec =
          d.psis * ((cmu - 1.0) * t.array()).matrix() - dt.psis * ((cmut - 1.0) * tt.array()).matrix();
      const Eigen::VectorXd e6_vec =
          d.psis * ((cmu - 1.0) * t.array()).matrix() - dt.psis * ((cmu - 1.0) * tt.array()).matrix();
      const Eigen::VectorXd e7_vec = dt.psis * ((cmu - cmut) * tt.array()).matrix();

      BlockOperator op_mu = a.op;
      op_mu.shift = Complex(-mu, 0.0);
      const Eigen::VectorXd u_mu = assembly::apply_dirichlet_solve(op_mu, f);
      BlockOperator opt_mu = b0.op;
      opt_mu.shift = Complex(-mu, 0.0);
      const Eigen::VectorXd ut_mu = assembly::apply_dirichlet_solve(opt_mu, f);

      const Eigen::VectorXd shift_series = dtn::resolvent_shift_series(d, f, mu);
      const Eigen::VectorXd shift_two = dtn::neumann_trace(a.op, u - u_mu);
      const double oracle_shift = d.boundary_norm(shift_series - shift_two) / bnf;

      // e5 equals tau(u~_mu) - tau(u_mu); A_BI is shared by the pair.
      const Eigen::VectorXd rem_two =
          dtn::neumann_trace(a.op, ut_mu) - dtn::neumann_trace(a.op, u_mu);
      const double oracle_rem = d.boundary_norm(e5_vec - rem_two) / bnf;
      const double split = d.boundary_norm(e5_vec - e6_vec - e7_vec) / bnf;

      const double e5 = d.boundary_norm(e5_vec);
      const double e7 = d.boundary_norm(e7_vec);
      rep.add_row({double(i), mu, e5, d.boundary_norm(e6_vec), e7, oracle_shift, oracle_rem, split});
      e5s.push_back(e5);
      e7s.push_back(e7);
      worst_shift = std::max(worst_shift, oracle_shift);
      worst_rem = std::max(worst_rem, oracle_rem);
      worst_split = std::max(worst_split, split);
    }

    rep.check(idx("oracle_shift", i), worst_shift <= cfg.tol.exactness, worst_shift,
              cfg.tol.exactness, "<=");
    rep.check(idx("oracle_remainder", i), worst_rem <= cfg.tol.exactness, worst_rem,
              cfg.tol.exactness, "<=");
    rep.check(idx("split_identity", i), worst_split <= 1e-12, worst_split, 1e-12, "<=");
    rep.check(idx("remainder_decreasing", i), max_uptick(e5s) <= 1e-12, max_uptick(e5s), 1e-12,
              "<=");
    const double shrink = e5s.back() / std::max(e5s.front(), 1e-300);
    rep.check(idx("remainder_vanishes", i), shrink <= 1e-4, shrink, 1e-4, "<=");

    // Fit the decay exponent where mu dominates the whole spectrum.
    std::vector<double> xs, ys;
    const double mu_from = 10.0 * lambda_max;
    for (std::size_t m = 0; m < mus.size(); ++m)
      if (mus[m] >= mu_from) {
        xs.push_back(mus[m]);
        ys.push_back(e7s[m]);
      }
    if (xs.size() < 3) {
      const auto take = static_cast<std::ptrdiff_t>(std::min<std::size_t>(3, mus.size()));
      xs.assign(mus.end() - take, mus.end());
      ys.assign(e7s.end() - take, e7s.end());
    }
    const double slope = loglog_slope(xs, ys);
    rep.check(idx("tail_slope", i), slope >= cfg.tol.e7_slope_lo && slope <= cfg.tol.e7_slope_hi,
              slope, cfg.tol.e7_slope_hi,
              "in [" + std::to_string(cfg.tol.e7_slope_lo) + ", " +
                  std::to_string(cfg.tol.e7_slope_hi) + "]");
    rep.metrics[idx("e7_slope", i)] = slope;
    rep.metrics[idx("mu_fit_from", i)] = xs.front();
  }

  {
    // Identical pair: the remainder difference cancels term by term.
    const Potential q = pair_on_grid(g, cfg, 0).q;
    const Solved a = solve_all(g, metric, q, cfg.epsilon);
    const Solved b = solve_all(g, metric, q, cfg.epsilon);
    const Eigen::VectorXd f = normal_probe(probe_seed(cfg, 0, 0), a.op.boundary_count());
    const Eigen::VectorXd wf = a.data.weights.cwiseProduct(f);
    const Eigen::VectorXd t =
        (-(a.data.psis.transpose() * wf).array() / a.data.lambdas.array()).matrix();
    const Eigen::VectorXd tt =
        (-(b.data.psis.transpose() * wf).array() / b.data.lambdas.array()).matrix();
    const double mu = mus[mus.size() / 2];
    const Eigen::ArrayXd cmu = mu / (mu + a.data.lambdas.array());
    const Eigen::ArrayXd cmut = mu / (mu + b.data.lambdas.array());
    const Eigen::VectorXd e5_vec = a.data.psis * ((cmu - 1.0) * t.array()).matrix() -
                                   b.data.psis * ((cmut - 1.0) * tt.array()).matrix();
    const double e5 = a.data.boundary_norm(e5_vec);
    rep.check("identical_remainder", e5 <= cfg.tol.exactness, e5, cfg.tol.exactness, "<=");
  }

  rep.metrics["lambda_max"] = lambda_max;
  rep.elapsed_ms = timer.ms();
  return rep;
}

ExperimentReport run_incomplete_data(const RunConfig& cfg) {
  Timer timer;
  const std::vector<double> taus = config::sweep_points(cfg.tau);

  ExperimentReport rep = base_report(cfg, "");
  rep.row_header = {"level", "pair", "delta", "tau", "dtn_diff_norm", "B", "spectral_sum",
                    "two_tau_norm"};

  std::string stamp;
  std::vector<std::array<double, 2>> c_fit(static_cast<std::size_t>(cfg.pair_count),
                                           {0.0, 0.0});

  for (int level = 0; level < 2; ++level) {
    config::GridSpec gs = cfg.grid;
    if (level == 1) gs.counts = cfg.refine_counts;
    const grid::Grid g = config::make_grid(gs);
    const grid::Metric metric = config::make_metric(g, cfg.metric);
    stamp = level == 0 ? grid_stamp(g) : stamp + " / " + grid_stamp(g);

    double worst_uptick = -1.0;
    double tau_tail_from = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cfg.pair_count; ++i) {
      const PotentialPair pair = pair_on_grid(g, cfg, i);
      const Solved a = solve_all(g, metric, pair.q, cfg.epsilon);
      const Solved b = solve_all(g, metric, pair.qt, cfg.epsilon);
      const int n = a.es.size();
      const double lam_top = std::max(a.es.lambdas(n - 1), b.es.lambdas(n - 1));
      const double pnorm = m_norm(a.op.M, pair.q.values - pair.qt.values);
      const double pnorm4 = pnorm * pnorm * pnorm * pnorm;

      std::vector<double> tail_norms;
      double liminf = std::numeric_limits<double>::infinity();
      for (double tau : taus) {
        const Complex lambda(tau * tau - 1.0, 2.0 * tau);
        const dtn::DtnMatrix diff = map_difference(dtn::dtn_series(a.data, a.op, n, false, lambda),
                                                   dtn::dtn_series(b.data, b.op, n, false, lambda));
        const double norm = dtn::operator_norm(diff);
        const double bound = 1.0 / (2.0 * tau) + 2.0 * tau * norm;

        double sum3 = 0.0;
        for (int k = 0; k < std::min(cfg.ell, n); ++k) {
          sum3 += a.es.lambdas(k) * a.es.lambdas(k) / std::abs(Complex(a.es.lambdas(k), 0) - lambda);
          sum3 += b.es.lambdas(k) * b.es.lambdas(k) / std::abs(Complex(b.es.lambdas(k), 0) - lambda);
        }

        rep.add_row({double(level), double(i), pair.delta, tau, norm, bound, sum3,
                     2.0 * tau * norm});
        liminf = std::min(liminf, 2.0 * tau * norm);
        c_fit[static_cast<std::size_t>(i)][static_cast<std::size_t>(level)] =
            std::max(c_fit[static_cast<std::size_t>(i)][static_cast<std::size_t>(level)],
                     pnorm4 / bound);
        if (tau * tau - 1.0 >= lam_top) {
          tail_norms.push_back(norm);
          tau_tail_from = std::min(tau_tail_from, tau);
        }
      }
      if (tail_norms.size() >= 2) worst_uptick = std::max(worst_uptick, max_uptick(tail_norms));
      rep.metrics["liminf_two_tau_norm_p" + std::to_string(i) + "_level" + std::to_string(level)] =
          liminf;

      if (i == 0) {
        // Spot check the series difference against two shifted Schur solves.
        const double tau = taus[taus.size() / 2];
        const Complex lambda(tau * tau - 1.0, 2.0 * tau);
        const dtn::DtnMatrix sd = map_difference(dtn::dtn_series(a.data, a.op, n, false, lambda),
                                                 dtn::dtn_series(b.data, b.op, n, false, lambda));
        BlockOperator oa = a.op, ob = b.op;
        oa.shift = lambda;
        ob.shift = lambda;
        const dtn::DtnMatrix dd = map_difference(dtn::dtn_direct(oa), dtn::dtn_direct(ob));
        const double err = (sd.entries - dd.entries).cwiseAbs().maxCoeff() /
                           std::max(1.0, dd.entries.cwiseAbs().maxCoeff());
        rep.check("oracle_level" + std::to_string(level), err <= cfg.tol.exactness, err,
                  cfg.tol.exactness, "<=");
      }
    }
    if (worst_uptick > -1.0)
      rep.check("tail_monotone_level" + std::to_string(level), worst_uptick <= 1e-9, worst_uptick,
                1e-9, "<= (past the resonance band)");
    rep.metrics["tau_tail_from_level" + std::to_string(level)] = tau_tail_from;

    if (level == 0) {
      // Identical pair: the shifted maps agree exactly and B collapses to its
      // unavoidable 1/(2 tau) part.
      const Potential q = pair_on_grid(g, cfg, 0).q;
      const Solved a = solve_all(g, metric, q, cfg.epsilon);
      const Solved b = solve_all(g, metric, q, cfg.epsilon);
      const int n = a.es.size();
      double worst = 0.0;
      for (double tau : taus) {
        const Complex lambda(tau * tau - 1.0, 2.0 * tau);
        const dtn::DtnMatrix diff = map_difference(dtn::dtn_series(a.data, a.op, n, false, lambda),
                                                   dtn::dtn_series(b.data, b.op, n, false, lambda));
        const double norm = dtn::operator_norm(diff);
        const double bound = 1.0 / (2.0 * tau) + 2.0 * tau * norm;
        double sum3 = 0.0;
        for (int k = 0; k < std::min(cfg.ell, n); ++k) {
          sum3 += a.es.lambdas(k) * a.es.lambdas(k) /
                  std::abs(Complex(a.es.lambdas(k), 0) - lambda);
          sum3 += b.es.lambdas(k) * b.es.lambdas(k) /
                  std::abs(Complex(b.es.lambdas(k), 0) - lambda);
        }
        rep.add_row({0.0, -1.0, 0.0, tau, norm, bound, sum3, 2.0 * tau * norm});
        worst = std::max(worst, std::abs(bound - 1.0 / (2.0 * tau)));
      }
      rep.check("identical_shifted_identity", worst <= cfg.tol.shifted_identity, worst,
                cfg.tol.shifted_identity, "<=");
    }
  }

  double worst_drift = 1.0;
  for (int i = 0; i < cfg.pair_count; ++i) {
    const auto& c = c_fit[static_cast<std::size_t>(i)];
    const double r = c[1] / std::max(c[0], 1e-300);
    worst_drift = std::max(worst_drift, std::max(r, 1.0 / std::max(r, 1e-300)));
    rep.metrics["c_fit_p" + std::to_string(i) + "_level0"] = c[0];
    rep.metrics["c_fit_p" + std::to_string(i) + "_level1"] = c[1];
  }
  rep.check("c_fit_drift", worst_drift <= cfg.tol.drift_band, worst_drift, cfg.tol.drift_band,
            "<= (either direction)");

  rep.grid = stamp;
  rep.elapsed_ms = timer.ms();
  return rep;
}

ExperimentReport run_uniqueness_probe(const RunConfig& cfg) {
  Timer timer;
  const grid::Grid g = config::make_grid(cfg.grid);
  const grid::Metric metric = config::make_metric(g, cfg.metric);

  ExperimentReport rep = base_report(cfg, grid_stamp(g));
  rep.row_header = {"pair", "delta", "qdiff", "D_tail", "D_full"};

  double min_tail = std::numeric_limits<double>::infinity();
  double worst_tail_excess = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < cfg.pair_count; ++i) {
    const PotentialPair pair = pair_on_grid(g, cfg, i);
    const Solved a = solve_all(g, metric, pair.q, cfg.epsilon);
    const Solved b = solve_all(g, metric, pair.qt, cfg.epsilon);
    const spectral::AlignOutcome align = spectral::align_gauge(a.data, b.data, cfg.cluster_rtol);
    const spectral::DistanceReport tail = spectral::distance(a.data, align.aligned, cfg.ell);
    const spectral::DistanceReport full = spectral::distance(a.data, align.aligned, 1);
    const double qdiff = m_norm(a.op.M, pair.q.values - pair.qt.values);

    rep.add_row({double(i), pair.delta, qdiff, tail.D, full.D});
    if (qdiff >= cfg.tol.qdiff_floor) min_tail = std::min(min_tail, tail.D);
    worst_tail_excess =
        std::max(worst_tail_excess, (tail.D - full.D) / std::max(full.D, 1e-300));
  }

  // Identical pair, solved twice.
  const Potential q = pair_on_grid(g, cfg, 0).q;
  const Solved a = solve_all(g, metric, q, cfg.epsilon);
  const Solved b = solve_all(g, metric, q, cfg.epsilon);
  const spectral::AlignOutcome align = spectral::align_gauge(a.data, b.data, cfg.cluster_rtol);
  const double id_tail = spectral::distance(a.data, align.aligned, cfg.ell).D;
  rep.add_row({-1.0, 0.0, 0.0, id_tail, spectral::distance(a.data, align.aligned, 1).D});

  rep.check("tail_detects_separation", min_tail >= cfg.tol.tail_floor, min_tail,
            cfg.tol.tail_floor, ">=");
  rep.check("no_false_positive", id_tail <= cfg.tol.tail_floor, id_tail, cfg.tol.tail_floor,
            "<=");
  rep.check("tail_dominated", worst_tail_excess <= 1e-12, worst_tail_excess, 1e-12,
            "<= (tail sums never exceed full sums)");

  rep.metrics["min_tail_distance"] = min_tail;
  rep.metrics["identical_tail"] = id_tail;
  rep.metrics["ell"] = cfg.ell;
  rep.elapsed_ms = timer.ms();
  return rep;
}

ExperimentReport run_series_convergence(const RunConfig& cfg) {
  Timer timer;
  const grid::Grid g = config::make_grid(cfg.grid);
  const grid::Metric metric = config::make_metric(g, cfg.metric);

  ExperimentReport rep = base_report(cfg, grid_stamp(g));
  rep.row_header = {"pair", "K", "sup_truncation", "sup_constant"};

  double worst_final = 0.0, worst_uptick = -1.0, global_c = 0.0;
  for (int i = 0; i < cfg.pair_count; ++i) {
    const PotentialPair pair = pair_on_grid(g, cfg, i);
    const Solved a = solve_all(g, metric, pair.q, cfg.epsilon);
    const Solved b = solve_all(g, metric, pair.qt, cfg.epsilon);
    const SpectralBoundaryData dt = sign_align(a.data, b.data);
    const int n = a.es.size();
    const std::vector<int> ladder = truncation_ladder(cfg.Ks, n);
    const double dist = spectral::distance(a.data, dt, 1).D;
    const Eigen::MatrixXd target_map =
        map_difference(dtn::dtn_direct(a.op), dtn::dtn_direct(b.op)).entries.real();

    std::vector<Eigen::VectorXd> probes;
    std::vector<double> norms;
    double pair_c = 0.0;
    for (int j = 0; j < cfg.probes; ++j) {
      probes.push_back(normal_probe(probe_seed(cfg, i, j), a.op.boundary_count()));
      norms.push_back(a.data.boundary_norm(probes.back()));
      pair_c = std::max(pair_c, a.data.boundary_norm(target_map * probes.back()) /
                                    (norms.back() * std::max(dist, 1e-300)));
    }
    global_c = std::max(global_c, pair_c);

    std::vector<double> sup_err;
    for (int K : ladder) {
      double sup = 0.0;
      for (int j = 0; j < cfg.probes; ++j) {
        const dtn::BoundaryDecomposition dec =
            dtn::decompose_boundary(a.data, dt, probes[static_cast<std::size_t>(j)], K);
        const Eigen::VectorXd approx = dec.A1 + dec.A2 + dec.A3;
        const double err =
            a.data.boundary_norm(approx - target_map * probes[static_cast<std::size_t>(j)]) /
            norms[static_cast<std::size_t>(j)];
        sup = std::max(sup, err);
      }
      rep.add_row({double(i), double(K), sup, pair_c});
      sup_err.push_back(sup);
    }
    worst_final = std::max(worst_final, sup_err.back());
    worst_uptick = std::max(worst_uptick, max_uptick(sup_err));
    rep.metrics["distance_p" + std::to_string(i)] = dist;
  }

  {
    // Identical pair: every partial sum and the target are flat zero.
    const Potential q = pair_on_grid(g, cfg, 0).q;
    const Solved a = solve_all(g, metric, q, cfg.epsilon);
    const Solved b = solve_all(g, metric, q, cfg.epsilon);
    const SpectralBoundaryData dt = sign_align(a.data, b.data);
    const Eigen::VectorXd f = normal_probe(probe_seed(cfg, 0, 0), a.op.boundary_count());
    const Eigen::MatrixXd target_map =
        map_difference(dtn::dtn_direct(a.op), dtn::dtn_direct(b.op)).entries.real();
    const dtn::BoundaryDecomposition dec = dtn::decompose_boundary(a.data, dt, f, a.es.size());
    const double err = a.data.boundary_norm(dec.A1 + dec.A2 + dec.A3 - target_map * f) /
                       a.data.boundary_norm(f);
    rep.check("identical_pair_flat", err <= cfg.tol.exactness, err, cfg.tol.exactness, "<=");
  }

  rep.check("telescoping_exact", worst_final <= cfg.tol.exactness, worst_final, cfg.tol.exactness,
            "<=");
  rep.check("truncation_monotone", worst_uptick <= 1e-12, worst_uptick, 1e-12, "<=");
  rep.metrics["c_fit"] = global_c;
  rep.elapsed_ms = timer.ms();
  return rep;
}

ExperimentReport run_experiment(const RunConfig& cfg) {
  if (cfg.experiment == "eig") return run_eig(cfg);
  if (cfg.experiment == "dtn") return run_dtn(cfg);
  if (cfg.experiment == "distance") return run_distance(cfg);
  if (cfg.experiment == "lemma-check") return run_lemma_identity(cfg);
  if (cfg.experiment == "stability") return run_stability_sweep(cfg);
  if (cfg.experiment == "resolvent-limit") return run_resolvent_limit(cfg);
  if (cfg.experiment == "incomplete") return run_incomplete_data(cfg);
  if (cfg.experiment == "uniqueness") return run_uniqueness_probe(cfg);
  if (cfg.experiment == "series") return run_series_convergence(cfg);
  throw ConfigError("unknown experiment '" + cfg.experiment + "'");
}

}  // namespace dtnlab::lab

#include "dtnlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "dtnlab/errors.hpp"
#include "dtnlab/fields.hpp"

namespace dtnlab::config {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

void read_grid(const json& j, GridSpec& g) {
  reject_unknown_keys(j, {"dim", "extents", "counts"}, "grid");
  read(j, "dim", g.dim);
  read(j, "extents", g.extents);
  read(j, "counts", g.counts);
}

void read_metric(const json& j, MetricSpec& m) {
  reject_unknown_keys(j, {"family", "value", "amplitude", "center", "sigma", "base", "values"},
                      "metric");
  read(j, "family", m.family);
  read(j, "value", m.value);
  read(j, "amplitude", m.amplitude);
  read(j, "center", m.center);
  read(j, "sigma", m.sigma);
  read(j, "base", m.base);
  read(j, "values", m.values);
}

void read_potential(const json& j, PotentialSpec& p, const std::string& where) {
  reject_unknown_keys(j,
                      {"family", "value", "seed", "cutoff", "bumps", "amplitude", "offset",
                       "scale", "lo", "hi", "values"},
                      where);
  read(j, "family", p.family);
  read(j, "value", p.value);
  read(j, "seed", p.seed);
  read(j, "cutoff", p.cutoff);
  read(j, "bumps", p.bumps);
  read(j, "amplitude", p.amplitude);
  read(j, "offset", p.offset);
  read(j, "scale", p.scale);
  read(j, "lo", p.lo);
  read(j, "hi", p.hi);
  read(j, "values", p.values);
}

void read_sweep(const json& j, Sweep& s, const std::string& where) {
  reject_unknown_keys(j, {"min", "max", "count"}, where);
  read(j, "min", s.min);
  read(j, "max", s.max);
  read(j, "count", s.count);
}

void read_tolerances(const json& j, Tolerances& t) {
  reject_unknown_keys(j,
                      {"exactness", "split_residual", "drift_band", "weyl_lo_2d", "weyl_hi_2d",
                       "weyl_lo_1d", "weyl_hi_1d", "trace_slope_margin", "interp_residual",
                       "e7_slope_lo", "e7_slope_hi", "shifted_identity", "tail_floor",
                       "qdiff_floor", "gauge_change"},
                      "tolerances");
  read(j, "exactness", t.exactness);
  read(j, "split_residual", t.split_residual);
  read(j, "drift_band", t.drift_band);
  read(j, "weyl_lo_2d", t.weyl_lo_2d);
  read(j, "weyl_hi_2d", t.weyl_hi_2d);
  read(j, "weyl_lo_1d", t.weyl_lo_1d);
  read(j, "weyl_hi_1d", t.weyl_hi_1d);
  read(j, "trace_slope_margin", t.trace_slope_margin);
  read(j, "interp_residual", t.interp_residual);
  read(j, "e7_slope_lo", t.e7_slope_lo);
  read(j, "e7_slope_hi", t.e7_slope_hi);
  read(j, "shifted_identity", t.shifted_identity);
  read(j, "tail_floor", t.tail_floor);
  read(j, "qdiff_floor", t.qdiff_floor);
  read(j, "gauge_change", t.gauge_change);
}

json sweep_json(const Sweep& s) { return {{"min", s.min}, {"max", s.max}, {"count", s.count}}; }

void validate_potential_spec(const PotentialSpec& p, const std::string& where) {
  static const std::set<std::string> families{"constant", "gaussian-mix", "random-smooth",
                                              "array"};
  if (!families.count(p.family))
    throw ConfigError(where + ": unknown potential family '" + p.family + "'");
  if (p.family == "array" && p.values.empty())
    throw ConfigError(where + ": array potential needs values");
  if (p.cutoff < 0) throw ConfigError(where + ": cutoff must be nonnegative");
  if (p.bumps < 1) throw ConfigError(where + ": bumps must be positive");
  if (!(p.lo <= p.hi)) throw ConfigError(where + ": clamp interval is empty");
}

void validate(const RunConfig& cfg) {
  if (cfg.grid.dim != 1 && cfg.grid.dim != 2) throw ConfigError("grid dim must be 1 or 2");
  for (int a = 0; a < cfg.grid.dim; ++a) {
    if (cfg.grid.counts[static_cast<std::size_t>(a)] < 3)
      throw ConfigError("grid counts must be at least 3 per axis");
    if (!(cfg.grid.extents[static_cast<std::size_t>(a)] > 0.0))
      throw ConfigError("grid extents must be positive");
    if (cfg.refine_counts[static_cast<std::size_t>(a)] < 3)
      throw ConfigError("refine_counts must be at least 3 per axis");
  }
  if (cfg.metric.family != "constant" && cfg.metric.family != "gaussian-bump" &&
      cfg.metric.family != "array")
    throw ConfigError("unknown metric family '" + cfg.metric.family + "'");
  if (cfg.metric.family == "array" && cfg.metric.values.empty())
    throw ConfigError("array metric needs values");
  if (!(cfg.metric.base[0] > 0.0) || !(cfg.metric.base[1] > 0.0))
    throw ConfigError("metric base factors must be positive");
  validate_potential_spec(cfg.potential, "potential");
  if (cfg.has_tilde) validate_potential_spec(cfg.potential_tilde, "potential_tilde");
  if (!(cfg.epsilon > 0.0) || !(cfg.epsilon < 0.5))
    throw ConfigError("epsilon must lie in (0, 1/2)");
  if (!(cfg.aleph > 0.0)) throw ConfigError("aleph must be positive");
  if (!(cfg.tau.min >= 1.0)) throw ConfigError("tau_min must be at least 1");
  if (!(cfg.tau.max > cfg.tau.min)) throw ConfigError("tau sweep must ascend");
  if (cfg.tau.count < 2) throw ConfigError("tau sweep needs at least 2 points");
  const double decades = std::log10(cfg.tau.max / cfg.tau.min);
  if (cfg.tau.count - 1 > 25.0 * decades + 1.0)
    throw ConfigError("tau sweep exceeds 25 points per decade");
  if (!(cfg.mu.min > 0.0) || !(cfg.mu.max > cfg.mu.min) || cfg.mu.count < 2)
    throw ConfigError("mu sweep must be positive and ascending with at least 2 points");
  if (cfg.ell < 1) throw ConfigError("ell must be at least 1");
  if (!(cfg.cluster_rtol > 0.0) || !(cfg.cluster_rtol < 1.0))
    throw ConfigError("cluster_rtol must lie in (0, 1)");
  if (cfg.pair_count < 1) throw ConfigError("pair_count must be positive");
  if (cfg.deltas.empty()) throw ConfigError("deltas must be nonempty");
  for (double d : cfg.deltas)
    if (!(d > 0.0)) throw ConfigError("deltas must be positive");
  if (cfg.samples < 1 || cfg.probes < 1)
    throw ConfigError("samples and probes must be positive");
  for (int K : cfg.Ks)
    if (K < 1) throw ConfigError("truncation list entries must be positive");
  if (cfg.fit_window != std::array<int, 2>{0, 0} &&
      !(cfg.fit_window[0] >= 1 && cfg.fit_window[1] > cfg.fit_window[0]))
    throw ConfigError("fit_window must be 1 <= lo < hi (or 0,0 for the default)");
  if (cfg.format != "csv" && cfg.format != "json")
    throw ConfigError("format must be csv or json");
  if (cfg.out.empty()) throw ConfigError("output directory must be nonempty");
}

}  // namespace

RunConfig default_config(const std::string& experiment) {
  static const std::set<std::string> names{"eig",        "dtn",      "distance",
                                           "lemma-check", "stability", "resolvent-limit",
                                           "incomplete", "uniqueness", "series"};
  if (!names.count(experiment)) throw ConfigError("unknown experiment '" + experiment + "'");

  RunConfig cfg;
  cfg.experiment = experiment;
  if (experiment == "eig") {
    // The Weyl band needs the asymptotic regime; 17x17 tops out short of it,
    // and above k ~ 200 grid pollution flattens the fit again.
    cfg.grid.counts = {33, 33};
    cfg.fit_window = {10, 200};
  } else if (experiment == "distance") {
    cfg.has_tilde = true;
    cfg.potential_tilde = cfg.potential;
    cfg.potential_tilde.seed = 2;
  } else if (experiment == "lemma-check") {
    cfg.metric.family = "gaussian-bump";
    cfg.potential.offset = 2.5;
    cfg.potential.lo = 0.0;
    cfg.potential.hi = 5.0;
  } else if (experiment == "resolvent-limit") {
    cfg.pair_count = 1;
  } else if (experiment == "incomplete") {
    cfg.pair_count = 5;
    cfg.collar = true;
  } else if (experiment == "series") {
    cfg.pair_count = 3;
    cfg.Ks = {1, 2, 5, 10, 25, 50, 100, 150};
  }
  validate(cfg);
  return cfg;
}

RunConfig parse_config(const std::string& json_text, const std::string& experiment) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  RunConfig cfg = default_config(experiment);
  reject_unknown_keys(j,
                      {"experiment", "grid", "refine_counts", "metric", "potential",
                       "potential_tilde", "epsilon", "aleph", "Ks", "tau", "mu", "ell",
                       "cluster_rtol", "pair_count", "deltas", "samples", "probes",
                       "fit_window", "collar", "seed", "out", "format", "tolerances"},
                      "config");
  if (j.contains("experiment") && j.at("experiment").get<std::string>() != experiment)
    throw ConfigError("config experiment '" + j.at("experiment").get<std::string>() +
                      "' does not match requested '" + experiment + "'");
  if (j.contains("grid")) read_grid(j.at("grid"), cfg.grid);
  read(j, "refine_counts", cfg.refine_counts);
  if (j.contains("metric")) read_metric(j.at("metric"), cfg.metric);
  if (j.contains("potential")) read_potential(j.at("potential"), cfg.potential, "potential");
  if (j.contains("potential_tilde")) {
    read_potential(j.at("potential_tilde"), cfg.potential_tilde, "potential_tilde");
    cfg.has_tilde = true;
  }
  read(j, "epsilon", cfg.epsilon);
  read(j, "aleph", cfg.aleph);
  read(j, "Ks", cfg.Ks);
  if (j.contains("tau")) read_sweep(j.at("tau"), cfg.tau, "tau");
  if (j.contains("mu")) read_sweep(j.at("mu"), cfg.mu, "mu");
  read(j, "ell", cfg.ell);
  read(j, "cluster_rtol", cfg.cluster_rtol);
  read(j, "pair_count", cfg.pair_count);
  read(j, "deltas", cfg.deltas);
  read(j, "samples", cfg.samples);
  read(j, "probes", cfg.probes);
  read(j, "fit_window", cfg.fit_window);
  read(j, "collar", cfg.collar);
  read(j, "seed", cfg.seed);
  read(j, "out", cfg.out);
  read(j, "format", cfg.format);
  if (j.contains("tolerances")) read_tolerances(j.at("tolerances"), cfg.tol);
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path, const std::string& experiment) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), experiment);
}

std::string canonical_json(const RunConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment;
  j["grid"] = {{"dim", cfg.grid.dim}, {"extents", cfg.grid.extents}, {"counts", cfg.grid.counts}};
  j["refine_counts"] = cfg.refine_counts;
  j["metric"] = {{"family", cfg.metric.family}, {"value", cfg.metric.value},
                 {"amplitude", cfg.metric.amplitude}, {"center", cfg.metric.center},
                 {"sigma", cfg.metric.sigma}, {"base", cfg.metric.base},
                 {"values", cfg.metric.values}};
  auto pot = [](const PotentialSpec& p) {
    return json{{"family", p.family}, {"value", p.value},   {"seed", p.seed},
                {"cutoff", p.cutoff}, {"bumps", p.bumps},   {"amplitude", p.amplitude},
                {"offset", p.offset}, {"scale", p.scale},   {"lo", p.lo},
                {"hi", p.hi},         {"values", p.values}};
  };
  j["potential"] = pot(cfg.potential);
  if (cfg.has_tilde) j["potential_tilde"] = pot(cfg.potential_tilde);
  j["epsilon"] = cfg.epsilon;
  j["aleph"] = cfg.aleph;
  j["Ks"] = cfg.Ks;
  j["tau"] = sweep_json(cfg.tau);
  j["mu"] = sweep_json(cfg.mu);
  j["ell"] = cfg.ell;
  j["cluster_rtol"] = cfg.cluster_rtol;
  j["pair_count"] = cfg.pair_count;
  j["deltas"] = cfg.deltas;
  j["samples"] = cfg.samples;
  j["probes"] = cfg.probes;
  j["fit_window"] = cfg.fit_window;
  j["collar"] = cfg.collar;
  j["seed"] = cfg.seed;
  j["format"] = cfg.format;
  j["tolerances"] = {{"exactness", cfg.tol.exactness},
                     {"split_residual", cfg.tol.split_residual},
                     {"drift_band", cfg.tol.drift_band},
                     {"weyl_lo_2d", cfg.tol.weyl_lo_2d},
                     {"weyl_hi_2d", cfg.tol.weyl_hi_2d},
                     {"weyl_lo_1d", cfg.tol.weyl_lo_1d},
                     {"weyl_hi_1d", cfg.tol.weyl_hi_1d},
                     {"trace_slope_margin", cfg.tol.trace_slope_margin},
                     {"interp_residual", cfg.tol.interp_residual},
                     {"e7_slope_lo", cfg.tol.e7_slope_lo},
                     {"e7_slope_hi", cfg.tol.e7_slope_hi},
                     {"shifted_identity", cfg.tol.shifted_identity},
                     {"tail_floor", cfg.tol.tail_floor},
                     {"qdiff_floor", cfg.tol.qdiff_floor},
                     {"gauge_change", cfg.tol.gauge_change}};
  return j.dump();
}

std::string config_hash(const RunConfig& cfg) {
  const std::string s = canonical_json(cfg);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

grid::Grid make_grid(const GridSpec& spec) {
  std::vector<double> extents(spec.extents.begin(), spec.extents.begin() + spec.dim);
  std::vector<int> counts(spec.counts.begin(), spec.counts.begin() + spec.dim);
  return grid::build_grid(spec.dim, extents, counts);
}

grid::Metric make_metric(const grid::Grid& g, const MetricSpec& spec) {
  if (spec.family == "constant") return grid::constant_metric(g, spec.value, spec.base);
  if (spec.family == "gaussian-bump") {
    const auto f =
        fields::gaussian_bump(spec.value, spec.amplitude, spec.center, spec.sigma);
    return grid::metric_from_function(g, f, spec.base);
  }
  Eigen::VectorXd values =
      Eigen::Map<const Eigen::VectorXd>(spec.values.data(),
                                        static_cast<Eigen::Index>(spec.values.size()));
  return grid::metric_from_values(g, std::move(values), spec.base);
}

assembly::Potential make_potential(const grid::Grid& g, const PotentialSpec& spec, double aleph,
                                   bool collar) {
  assembly::Potential q;
  if (spec.family == "array") {
    Eigen::VectorXd values =
        Eigen::Map<const Eigen::VectorXd>(spec.values.data(),
                                          static_cast<Eigen::Index>(spec.values.size()));
    q = assembly::potential_from_interior_values(g, std::move(values), aleph);
  } else {
    fields::Field f;
    if (spec.family == "constant")
      f = fields::constant_field(spec.value);
    else if (spec.family == "gaussian-mix")
      f = fields::gaussian_mix(spec.seed, spec.bumps, g.extents, g.dim, spec.amplitude, spec.lo,
                               spec.hi);
    else
      f = fields::random_smooth(spec.seed, spec.cutoff, g.extents, g.dim, spec.offset, spec.scale,
                                spec.lo, spec.hi);
    q = assembly::make_potential(g, f, aleph);
  }
  if (collar) zero_collar(g, q, {g.spacing[0], g.spacing[1]});
  return q;
}

void zero_collar(const grid::Grid& g, assembly::Potential& q, std::array<double, 2> width) {
  if (q.values.size() != static_cast<Eigen::Index>(g.interior_ids.size()))
    throw ConfigError("potential does not match the grid it is being collared on");
  for (int i = 0; i < static_cast<int>(g.interior_ids.size()); ++i) {
    const auto xy = g.coords(g.interior_ids[static_cast<std::size_t>(i)]);
    bool on_collar = false;
    for (int ax = 0; ax < g.dim; ++ax) {
      const double edge = std::min(xy[static_cast<std::size_t>(ax)],
                                   g.extents[static_cast<std::size_t>(ax)] -
                                       xy[static_cast<std::size_t>(ax)]);
      if (edge <= width[static_cast<std::size_t>(ax)] * (1.0 + 1e-9)) on_collar = true;
    }
    if (on_collar) q.values(i) = 0.0;
  }
}

std::vector<double> sweep_points(const Sweep& s) {
  std::vector<double> pts(static_cast<std::size_t>(s.count));
  const double l0 = std::log(s.min);
  const double l1 = std::log(s.max);
  for (int i = 0; i < s.count; ++i)
    pts[static_cast<std::size_t>(i)] = std::exp(l0 + (l1 - l0) * i / (s.count - 1));
  pts.front() = s.min;
  pts.back() = s.max;
  return pts;
}

}  // namespace dtnlab::config

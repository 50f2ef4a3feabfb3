#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dtnlab/assembly.hpp"
#include "dtnlab/grid.hpp"

namespace dtnlab::config {

struct GridSpec {
  int dim = 2;
  std::array<double, 2> extents{1.0, 1.37};
  std::array<int, 2> counts{17, 17};
};

struct MetricSpec {
  std::string family = "constant";  // constant | gaussian-bump | array
  double value = 1.0;               // constant conformal factor
  double amplitude = 0.35;          // gaussian-bump: factor is value + amplitude * exp(...)
  std::array<double, 2> center{0.4, 0.6};
  double sigma = 0.25;
  std::array<double, 2> base{1.0, 1.0};  // transversal product weights
  std::vector<double> values;            // array family: one factor per node
};

struct PotentialSpec {
  std::string family = "random-smooth";  // constant | gaussian-mix | random-smooth | array
  double value = 0.0;                    // constant family
  std::uint64_t seed = 1;
  int cutoff = 3;   // random-smooth cosine cutoff
  int bumps = 3;    // gaussian-mix term count
  double amplitude = 1.0;
  double offset = 2.5;
  double scale = 1.0;
  double lo = 0.5;
  double hi = 4.5;
  std::vector<double> values;  // array family: one value per interior node
};

// Log-spaced sweep with `count` points from min to max inclusive.
struct Sweep {
  double min = 1.0;
  double max = 1e3;
  int count = 13;
};

// Tolerances used by experiment checks, centralized so a report always states
// the threshold next to the value it gated.
struct Tolerances {
  double exactness = 1e-10;         // series-vs-direct and oracle matches
  double split_residual = 1e-9;     // three-term splitting reconstruction
  double drift_band = 2.0;          // refinement drift factor for ratios and c_fit
  double weyl_lo_2d = 0.85, weyl_hi_2d = 1.15;
  double weyl_lo_1d = 1.8, weyl_hi_1d = 2.2;
  double trace_slope_margin = 0.2;  // slack over (3+2eps)/(2 dim)
  double interp_residual = 1e-12;
  double e7_slope_lo = -1.2, e7_slope_hi = -0.8;
  double shifted_identity = 1e-12;  // B(tau) = 1/(2 tau) for identical pairs
  double tail_floor = 1e-10;        // distance detection floor
  double qdiff_floor = 1e-6;        // potential separation considered distinct
  double gauge_change = 1e-8;       // distance shift allowed under reordering
};

struct RunConfig {
  std::string experiment = "lemma-check";
  GridSpec grid;
  std::array<int, 2> refine_counts{33, 33};  // second grid for drift checks
  MetricSpec metric;
  PotentialSpec potential;
  PotentialSpec potential_tilde;
  bool has_tilde = false;
  double epsilon = 0.1;
  double aleph = 5.0;
  std::vector<int> Ks;  // truncation ladder; the full spectrum is appended
  Sweep tau{1.0, 1e3, 13};
  Sweep mu{1.0, 1e8, 17};
  int ell = 5;
  double cluster_rtol = 3e-2;  // gauge alignment clustering
  int pair_count = 20;
  std::vector<double> deltas{1e-3, 1e-2, 1e-1};
  int samples = 5;  // potentials per sample sweep
  int probes = 5;   // boundary data probes per potential
  std::array<int, 2> fit_window{0, 0};  // 0 means the solver's default window
  bool collar = false;  // zero potentials on the first interior layer
  std::uint64_t seed = 1;
  std::string out = "out";
  std::string format = "csv";
  Tolerances tol;
};

// Defaults tuned per experiment (grids, sweeps, pair counts). Unknown names
// are rejected.
RunConfig default_config(const std::string& experiment);

// Reads a JSON document; missing keys keep the experiment defaults, unknown
// keys are rejected. Throws ConfigError on malformed or invalid input.
RunConfig load_config(const std::string& path, const std::string& experiment);
RunConfig parse_config(const std::string& json_text, const std::string& experiment);

// Canonical serialized form (sorted keys); two configs hash equal iff this
// string is equal.
std::string canonical_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);  // FNV-1a 64 of canonical_json, hex

// Spec-to-object materialization.
grid::Grid make_grid(const GridSpec& spec);
grid::Metric make_metric(const grid::Grid& g, const MetricSpec& spec);
assembly::Potential make_potential(const grid::Grid& g, const PotentialSpec& spec, double aleph,
                                   bool collar);

// Zeroes q on interior nodes within `width` of the boundary, per axis. The
// collar is a fixed physical band, so refining the grid keeps the same
// modified potential; on the grid that defined the width it is the first
// interior layer.
void zero_collar(const grid::Grid& g, assembly::Potential& q, std::array<double, 2> width);

// Lays the sweep out as explicit log-spaced points, min and max included.
std::vector<double> sweep_points(const Sweep& s);

}  // namespace dtnlab::config

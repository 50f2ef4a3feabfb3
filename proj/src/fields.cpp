#include "dtnlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dtnlab/errors.hpp"

namespace dtnlab::fields {

Field constant_field(double value) {
  return [value](double, double) { return value; };
}

Field gaussian_bump(double base, double amplitude, std::array<double, 2> center, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("gaussian bump sigma must be positive");
  return [=](double x, double y) {
    const double dx = x - center[0];
    const double dy = y - center[1];
    return base + amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
  };
}

Field gaussian_mix(std::uint64_t seed, int bumps, std::array<double, 2> extents, int dim,
                   double amplitude, double lo, double hi) {
  if (bumps < 1) throw ConfigError("gaussian mix needs at least one bump");
  if (!(lo <= hi)) throw ConfigError("field clamp interval is empty");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Bump {
    double cx, cy, sigma, height;
  };
  std::vector<Bump> terms(static_cast<std::size_t>(bumps));
  for (auto& t : terms) {
    t.cx = (0.15 + 0.7 * unit(rng)) * extents[0];
    t.cy = dim == 2 ? (0.15 + 0.7 * unit(rng)) * extents[1] : 0.0;
    t.sigma = (0.08 + 0.17 * unit(rng)) * std::max(extents[0], dim == 2 ? extents[1] : 0.0);
    t.height = amplitude * (0.3 + 0.7 * unit(rng));
  }
  return [terms, lo, hi](double x, double y) {
    double v = 0.0;
    for (const auto& t : terms) {
      const double dx = x - t.cx;
      const double dy = y - t.cy;
      v += t.height * std::exp(-(dx * dx + dy * dy) / (2.0 * t.sigma * t.sigma));
    }
    return std::clamp(v, lo, hi);
  };
}

Field random_smooth(std::uint64_t seed, int cutoff, std::array<double, 2> extents, int dim,
                    double offset, double scale, double lo, double hi) {
  if (cutoff < 0) throw ConfigError("cosine cutoff must be nonnegative");
  if (dim != 1 && dim != 2) throw ConfigError("dimension must be 1 or 2");
  if (!(lo <= hi)) throw ConfigError("field clamp interval is empty");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  // Row-major (m outer, n inner) draw order; 1D collapses to the n = 0 column.
  const int nn = dim == 2 ? cutoff + 1 : 1;
  std::vector<double> coeff(static_cast<std::size_t>((cutoff + 1) * nn));
  for (auto& c : coeff) c = normal(rng);
  return [=](double x, double y) {
    double s = 0.0;
    for (int m = 0; m <= cutoff; ++m)
      for (int n = 0; n < nn; ++n) {
        double term = coeff[static_cast<std::size_t>(m * nn + n)] / (1.0 + m * m + n * n);
        term *= std::cos(m * M_PI * x / extents[0]);
        if (dim == 2) term *= std::cos(n * M_PI * y / extents[1]);
        s += term;
      }
    return std::clamp(offset + scale * s, lo, hi);
  };
}

}  // namespace dtnlab::fields

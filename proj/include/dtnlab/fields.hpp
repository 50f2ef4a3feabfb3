#pragma once

#include <array>
#include <cstdint>
#include <functional>

namespace dtnlab::fields {

// Scalar field on domain coordinates. 1D fields ignore the second argument.
using Field = std::function<double(double, double)>;

Field constant_field(double value);

// base + amplitude * exp(-|x - center|^2 / (2 sigma^2)).
Field gaussian_bump(double base, double amplitude, std::array<double, 2> center, double sigma);

// Sum of `bumps` Gaussian bumps with centers, widths and heights drawn
// deterministically from the seed, clamped to [lo, hi].
Field gaussian_mix(std::uint64_t seed, int bumps, std::array<double, 2> extents, int dim,
                   double amplitude, double lo, double hi);

// offset + scale * sum_{m,n<=cutoff} g_mn cos(m pi x/Lx) cos(n pi y/Ly) / (1+m^2+n^2)
// with g_mn standard normal from the seed, clipped to [lo, hi]. In 1D the sum
// runs over m only. Coefficients depend on the seed alone, never on a grid,
// so refining the grid samples the same field.
Field random_smooth(std::uint64_t seed, int cutoff, std::array<double, 2> extents, int dim,
                    double offset, double scale, double lo, double hi);

}  // namespace dtnlab::fields

#ifndef SELSEG_FILTERS_HPP_
#define SELSEG_FILTERS_HPP_

// Stencils and separable filters on unit-spaced grids. Every operator uses
// half-sample symmetric (reflecting) boundaries.

#include <cmath>
#include <vector>

#include "selseg/grid.hpp"

namespace selseg {

/// |grad f|^2 by central differences.
inline ScalarField gradient_norm_squared(ScalarField const& f) {
  ScalarField out(f.width(), f.height());
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      double const gx = 0.5 * (f.reflected(x + 1, y) - f.reflected(x - 1, y));
      double const gy = 0.5 * (f.reflected(x, y + 1) - f.reflected(x, y - 1));
      out(x, y) = gx * gx + gy * gy;
    }
  }
  return out;
}

/// Unit-mass Gaussian taps truncated at 4 sigma.
inline std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw InputError("gaussian sigma must be positive");
  int const radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    double const w = std::exp(-0.5 * (i * i) / (sigma * sigma));
    taps[i + radius] = w;
    sum += w;
  }
  for (double& t : taps) t /= sum;
  return taps;
}

/// Applies the same odd-length 1D kernel along x then along y.
inline ScalarField separable_filter(ScalarField const& f, std::vector<double> const& taps) {
  int const radius = static_cast<int>(taps.size() / 2);
  ScalarField tmp(f.width(), f.height());
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += taps[k + radius] * f.reflected(x + k, y);
      tmp(x, y) = acc;
    }
  }
  ScalarField out(f.width(), f.height());
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += taps[k + radius] * tmp.reflected(x, y + k);
      out(x, y) = acc;
    }
  }
  return out;
}

inline ScalarField gaussian_blur(ScalarField const& f, double sigma) {
  return separable_filter(f, gaussian_kernel(sigma));
}

/// k x k moving average (k odd); k = 1 is the identity.
inline ScalarField box_mean(ScalarField const& f, int k) {
  if (k < 1 || k % 2 == 0) throw InputError("box window must be a positive odd integer");
  if (k == 1) return f;
  return separable_filter(f, std::vector<double>(k, 1.0 / k));
}

}  // namespace selseg

#endif  // SELSEG_FILTERS_HPP_

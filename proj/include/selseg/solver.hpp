#ifndef SELSEG_SOLVER_HPP_
#define SELSEG_SOLVER_HPP_

#include <cmath>
#include <vector>

#include "selseg/aos.hpp"
#include "selseg/filters.hpp"
#include "selseg/fitting.hpp"
#include "selseg/geodesic.hpp"
#include "selseg/grid.hpp"

namespace selseg {

struct SegmentationResult {
  ScalarField u_star;
  BinaryMask mask;
  IntensityConstants constants;
  int iterations = 0;
  std::vector<double> residuals;
  bool converged = false;
};

/// g = 1 / (1 + beta |grad z|^2).
inline ScalarField edge_weight(GrayImage const& z, double edge_beta) {
  if (!(edge_beta >= 0.0)) throw InputError("edge_beta must be >= 0");
  ScalarField g = gradient_norm_squared(z.field());
  for (double& v : g) v = 1.0 / (1.0 + edge_beta * v);
  return g;
}

/// 1 where u > gamma.
inline BinaryMask threshold(ScalarField const& u, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InputError("threshold must lie in (0,1)");
  BinaryMask mask(u.width(), u.height());
  for (std::size_t i = 0; i < u.size(); ++i) mask[i] = u[i] > gamma ? 1 : 0;
  return mask;
}

namespace detail {

inline double l2_norm(ScalarField const& f) {
  double s = 0.0;
  for (double v : f) s += v * v;
  return std::sqrt(s);
}

inline double relative_change(ScalarField const& next, ScalarField const& prev) {
  double diff = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i) {
    double const d = next[i] - prev[i];
    diff += d * d;
  }
  double const base = l2_norm(prev);
  return base > 0.0 ? std::sqrt(diff) / base : std::sqrt(diff);
}

}  // namespace detail

/// Selective segmentation of the object marked by `input`.
///
/// Builds the geodesic distance from the marker region, the model's fitting
/// field and the rescaled data term, then iterates aos_step from the
/// indicator of the region until the relative change drops below the
/// tolerance or max_iters is reached. Iterative models re-estimate their
/// constants from the thresholded iterate every `update_every` steps.
///
/// This overload takes a distance field computed earlier for the same
/// markers, so repeated runs with one marker set share it.
inline SegmentationResult segment(GrayImage const& z, MarkerInput const& input,
                                  FittingSpec const& spec, SolverConfig const& config,
                                  DistanceField const& distance) {
  input.validate(z.width(), z.height());
  spec.validate();
  config.validate();
  require_same_shape(z.field(), distance.values, "segment");

  ScalarField const g = edge_weight(z, config.edge_beta);
  BinaryMask const* hard = input.hard_background ? &*input.hard_background : nullptr;

  SegmentationResult result;
  result.constants = initial_constants(z, input.region, spec);
  CombinedField F = combine(fitting_field(z, result.constants, spec), distance, config.theta, hard);

  ScalarField u(z.width(), z.height(), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = input.region[i] ? 1.0 : 0.0;

  bool const iterative = is_iterative(spec.model);
  for (int k = 1; k <= config.max_iters; ++k) {
    ScalarField next = aos_step(u, F, g, config);
    for (double v : next) {
      if (!std::isfinite(v)) throw InputError("solver diverged: non-finite iterate");
    }
    double const delta = detail::relative_change(next, u);
    u = std::move(next);
    result.residuals.push_back(delta);
    result.iterations = k;
    if (delta < config.tolerance) {
      result.converged = true;
      break;
    }
    if (iterative && k % config.update_every == 0) {
      result.constants = update_constants(z, threshold(u, config.gamma_threshold), spec);
      F = combine(fitting_field(z, result.constants, spec), distance, config.theta, hard);
    }
  }
  result.mask = threshold(u, config.gamma_threshold);
  result.u_star = std::move(u);
  return result;
}

inline SegmentationResult segment(GrayImage const& z, MarkerInput const& input,
                                  FittingSpec const& spec, SolverConfig const& config,
                                  GeodesicParams const& geo = {}) {
  input.validate(z.width(), z.height());
  return segment(z, input, spec, config, geodesic_distance(z, input, geo));
}

}  // namespace selseg

#endif  // SELSEG_SOLVER_HPP_

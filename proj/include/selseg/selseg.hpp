#ifndef SELSEG_SELSEG_HPP_
#define SELSEG_SELSEG_HPP_

// Everything except the HTTP service (selseg/service.hpp).

#include "selseg/aos.hpp"
#include "selseg/contour.hpp"
#include "selseg/filters.hpp"
#include "selseg/fitting.hpp"
#include "selseg/geodesic.hpp"
#include "selseg/grid.hpp"
#include "selseg/harness.hpp"
#include "selseg/image_io.hpp"
#include "selseg/metrics.hpp"
#include "selseg/otsu.hpp"
#include "selseg/penalty.hpp"
#include "selseg/rng.hpp"
#include "selseg/serialization.hpp"
#include "selseg/solver.hpp"

#endif  // SELSEG_SELSEG_HPP_

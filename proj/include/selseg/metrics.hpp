#ifndef SELSEG_METRICS_HPP_
#define SELSEG_METRICS_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "selseg/grid.hpp"

namespace selseg {

struct AccuracyScore {
  double tc = 0.0;
  std::size_t intersection = 0;
  std::size_t union_count = 0;
};

/// Tanimoto (Jaccard) coefficient |A & B| / |A | B|. Two empty masks score 1.
inline AccuracyScore tanimoto(BinaryMask const& mask, BinaryMask const& gt) {
  require_same_shape(mask, gt, "tanimoto");
  AccuracyScore s;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    bool const a = mask[i] != 0;
    bool const b = gt[i] != 0;
    s.intersection += a && b;
    s.union_count += a || b;
  }
  s.tc = s.union_count == 0 ? 1.0
                            : static_cast<double>(s.intersection) /
                                  static_cast<double>(s.union_count);
  return s;
}

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(Rgb const&, Rgb const&) = default;
};

/// Linear red (TC 0) to green (TC 1) ramp, rounded half up.
inline Rgb tc_color(double tc) {
  if (!(tc >= 0.0 && tc <= 1.0)) throw InputError("tc must lie in [0,1]");
  auto channel = [](double v) {
    return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
  };
  return {channel(1.0 - tc), channel(tc), 0};
}

}  // namespace selseg

#endif  // SELSEG_METRICS_HPP_

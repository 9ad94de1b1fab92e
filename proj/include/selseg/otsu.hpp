#ifndef SELSEG_OTSU_HPP_
#define SELSEG_OTSU_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "selseg/grid.hpp"

namespace selseg {

inline constexpr int kHistogramBins = 256;

using Histogram = std::array<double, kHistogramBins>;

/// Bin b holds intensities rounding to b/255.
inline int histogram_bin(double v) {
  return std::clamp(static_cast<int>(std::lround(v * 255.0)), 0, kHistogramBins - 1);
}

inline double bin_value(int b) { return b / 255.0; }

inline Histogram intensity_histogram(GrayImage const& z) {
  Histogram h{};
  for (std::size_t i = 0; i < z.size(); ++i) h[histogram_bin(z[i])] += 1.0;
  return h;
}

/// Multilevel Otsu thresholds on a 256-bin histogram.
///
/// Minimises the within-class variance exactly by dynamic programming over
/// the occupied bins. Each returned threshold sits halfway between the last
/// occupied bin of one class and the first of the next, so a pixel belongs to
/// the lower class iff its value is <= the threshold. When the histogram has
/// fewer than `classes` occupied bins, one threshold per gap is returned.
inline std::vector<double> otsu_thresholds(Histogram const& hist, int classes = 3) {
  if (classes < 2) throw InputError("otsu needs at least two classes");
  std::vector<int> bins;
  for (int b = 0; b < kHistogramBins; ++b) {
    if (hist[b] < 0.0) throw InputError("histogram counts must be non-negative");
    if (hist[b] > 0.0) bins.push_back(b);
  }
  if (bins.size() < 2) throw InputError("no separable classes");
  int const m = static_cast<int>(bins.size());
  int const k = std::min(classes, m);

  // Prefix sums over occupied bins: count, first and second moments.
  std::vector<double> s0(m + 1, 0.0), s1(m + 1, 0.0), s2(m + 1, 0.0);
  for (int i = 0; i < m; ++i) {
    double const v = bin_value(bins[i]);
    double const c = hist[bins[i]];
    s0[i + 1] = s0[i] + c;
    s1[i + 1] = s1[i] + c * v;
    s2[i + 1] = s2[i] + c * v * v;
  }
  // Sum of squared deviations of occupied bins [i, j).
  auto cost = [&](int i, int j) {
    double const n = s0[j] - s0[i];
    double const sum = s1[j] - s1[i];
    return std::max(0.0, (s2[j] - s2[i]) - sum * sum / n);
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // best[c][j]: minimal cost of splitting the first j bins into c classes.
  std::vector<std::vector<double>> best(k + 1, std::vector<double>(m + 1, kInf));
  std::vector<std::vector<int>> split(k + 1, std::vector<int>(m + 1, 0));
  for (int j = 1; j <= m; ++j) best[1][j] = cost(0, j);
  for (int c = 2; c <= k; ++c) {
    for (int j = c; j <= m; ++j) {
      for (int i = c - 1; i < j; ++i) {
        double const candidate = best[c - 1][i] + cost(i, j);
        if (candidate < best[c][j]) {
          best[c][j] = candidate;
          split[c][j] = i;
        }
      }
    }
  }
  std::vector<double> thresholds(k - 1);
  int j = m;
  for (int c = k; c >= 2; --c) {
    int const i = split[c][j];
    thresholds[c - 2] = 0.5 * (bin_value(bins[i - 1]) + bin_value(bins[i]));
    j = i;
  }
  return thresholds;
}

inline std::vector<double> otsu_thresholds(GrayImage const& z, int classes = 3) {
  return otsu_thresholds(intensity_histogram(z), classes);
}

/// Widths of the background tent around c1 derived from the thresholds.
struct GammaPair {
  double gamma1;
  double gamma2;
  friend bool operator==(GammaPair const&, GammaPair const&) = default;
};

inline constexpr double kMinGamma = 1.0 / 256.0;

/// Picks (gamma1, gamma2) from the class interval that contains c1:
/// below the first threshold (c1, T1 - c1); above the last (c1 - Tlast,
/// 1 - c1); otherwise the distances to the enclosing thresholds. Widths
/// below 1/256 are widened to 1/256.
inline GammaPair select_gammas(double c1, std::vector<double> const& thresholds) {
  if (thresholds.empty()) throw InputError("select_gammas needs at least one threshold");
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw InputError("thresholds must be ascending");
  }
  GammaPair g{};
  if (c1 <= thresholds.front()) {
    g = {c1, thresholds.front() - c1};
  } else if (c1 >= thresholds.back()) {
    g = {c1 - thresholds.back(), 1.0 - c1};
  } else {
    auto const upper = std::lower_bound(thresholds.begin(), thresholds.end(), c1);
    g = {c1 - *(upper - 1), *upper - c1};
  }
  g.gamma1 = std::max(g.gamma1, kMinGamma);
  g.gamma2 = std::max(g.gamma2, kMinGamma);
  return g;
}

}  // namespace selseg

#endif  // SELSEG_OTSU_HPP_

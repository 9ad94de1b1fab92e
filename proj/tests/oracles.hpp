#ifndef SELSEG_TESTS_ORACLES_HPP_
#define SELSEG_TESTS_ORACLES_HPP_

// Independent reference implementations used by the tests. They share only
// the grid containers with the library and favour plainness over speed.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "selseg/grid.hpp"
#include "selseg/otsu.hpp"
#include "selseg/rng.hpp"

namespace oracle {

using selseg::BinaryMask;
using selseg::ScalarField;

inline int reflect(int i, int n) {
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
  return i;
}

/// Shortest paths on the pixel graph with edges to the 8 neighbours and,
/// when `knight` is set, the 8 (1,2) moves. Edge cost: mean speed times length.
inline ScalarField dijkstra(ScalarField const& q, BinaryMask const& sources, bool knight) {
  int const w = q.width(), h = q.height();
  ScalarField d(w, h, std::numeric_limits<double>::infinity());
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  for (int i = 0; i < w * h; ++i) {
    if (sources[i]) {
      d[i] = 0.0;
      pq.push({0.0, i});
    }
  }
  std::vector<std::pair<int, int>> moves;
  for (int a = -2; a <= 2; ++a) {
    for (int b = -2; b <= 2; ++b) {
      int const cheb = std::max(std::abs(a), std::abs(b));
      if (cheb == 1 || (knight && std::abs(a) + std::abs(b) == 3)) moves.push_back({a, b});
    }
  }
  while (!pq.empty()) {
    auto const [dist, i] = pq.top();
    pq.pop();
    if (dist > d[i]) continue;
    int const x = i % w, y = i / w;
    for (auto const& [dx, dy] : moves) {
      int const nx = x + dx, ny = y + dy;
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      double const cand = dist + 0.5 * (q(x, y) + q(nx, ny)) * std::hypot(dx, dy);
      if (cand < d(nx, ny)) {
        d(nx, ny) = cand;
        pq.push({cand, ny * w + nx});
      }
    }
  }
  return d;
}

/// Sum over classes of counts * squared deviation from the class mean, the
/// classes being cut at the given thresholds (value <= t is the lower class),
/// divided by the total count.
inline double within_class_variance(selseg::Histogram const& hist,
                                    std::vector<double> const& thresholds) {
  std::size_t const k = thresholds.size() + 1;
  std::vector<double> n(k, 0.0), s(k, 0.0);
  auto class_of = [&](double v) {
    std::size_t c = 0;
    while (c < thresholds.size() && v > thresholds[c]) ++c;
    return c;
  };
  double total = 0.0;
  for (int b = 0; b < 256; ++b) {
    double const v = b / 255.0;
    std::size_t const c = class_of(v);
    n[c] += hist[b];
    s[c] += hist[b] * v;
    total += hist[b];
  }
  double var = 0.0;
  for (int b = 0; b < 256; ++b) {
    double const v = b / 255.0;
    std::size_t const c = class_of(v);
    if (n[c] == 0.0) continue;
    double const dev = v - s[c] / n[c];
    var += hist[b] * dev * dev;
  }
  return var / total;
}

/// Minimum within-class variance over every placement of the cuts between
/// adjacent bins (255 positions per cut), for 2 or 3 classes.
inline double exhaustive_min_variance(selseg::Histogram const& hist, int classes) {
  double best = std::numeric_limits<double>::infinity();
  auto cut = [](int k) { return (k + 0.5) / 255.0; };
  if (classes == 2) {
    for (int a = 0; a < 255; ++a) best = std::min(best, within_class_variance(hist, {cut(a)}));
  } else {
    // Prefix sums keep the 32k-pair search fast; the variance formula is the
    // same per-class sum of squares.
    std::vector<double> n(257, 0.0), s1(257, 0.0), s2(257, 0.0);
    for (int b = 0; b < 256; ++b) {
      double const v = b / 255.0;
      n[b + 1] = n[b] + hist[b];
      s1[b + 1] = s1[b] + hist[b] * v;
      s2[b + 1] = s2[b] + hist[b] * v * v;
    }
    auto ss = [&](int lo, int hi) {  // bins [lo, hi)
      double const c = n[hi] - n[lo];
      if (c == 0.0) return 0.0;
      double const m = s1[hi] - s1[lo];
      return (s2[hi] - s2[lo]) - m * m / c;
    };
    for (int a = 0; a < 255; ++a) {
      for (int b = a + 1; b < 255; ++b) {
        best = std::min(best, (ss(0, a + 1) + ss(a + 1, b + 1) + ss(b + 1, 256)) / n[256]);
      }
    }
  }
  return best;
}

/// Direct 2D sum of a separable kernel with reflecting boundaries.
inline ScalarField convolve_direct(ScalarField const& f, std::vector<double> const& taps) {
  int const r = static_cast<int>(taps.size() / 2);
  ScalarField out(f.width(), f.height());
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      double acc = 0.0;
      for (int j = -r; j <= r; ++j) {
        for (int i = -r; i <= r; ++i) {
          acc += taps[i + r] * taps[j + r] *
                 f(reflect(x + i, f.width()), reflect(y + j, f.height()));
        }
      }
      out(x, y) = acc;
    }
  }
  return out;
}

/// G = g / sqrt(ux^2 + uy^2 + eps^2) with central differences on reflected data.
inline ScalarField diffusivity(ScalarField const& u, ScalarField const& g, double eps) {
  int const w = u.width(), h = u.height();
  ScalarField out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double const ux = 0.5 * (u(reflect(x + 1, w), y) - u(reflect(x - 1, w), y));
      double const uy = 0.5 * (u(x, reflect(y + 1, h)) - u(x, reflect(y - 1, h)));
      out(x, y) = g(x, y) / std::sqrt(ux * ux + uy * uy + eps * eps);
    }
  }
  return out;
}

/// Dense matrix of d/dl(G d/dl) along x (axis 0) or y (axis 1) over the whole
/// grid, assembled from flux differences across each pixel face.
inline Eigen::MatrixXd dense_operator(ScalarField const& G, int axis) {
  int const w = G.width(), h = G.height();
  int const n = w * h;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int const nx = axis == 0 ? x + 1 : x;
      int const ny = axis == 0 ? y : y + 1;
      if (nx >= w || ny >= h) continue;  // no flux through the boundary
      int const i = y * w + x, j = ny * w + nx;
      double const c = 0.5 * (G[i] + G[j]);
      A(i, i) -= c;
      A(i, j) += c;
      A(j, j) -= c;
      A(j, i) += c;
    }
  }
  return A;
}

/// Reference modified AOS step by dense LU solves.
inline ScalarField aos_step_dense(ScalarField const& u, ScalarField const& F,
                                  ScalarField const& g, double lambda, double alpha,
                                  double tau, double eps1, ScalarField const& nu_prime,
                                  ScalarField const& b_tilde) {
  int const n = static_cast<int>(u.size());
  ScalarField const G = diffusivity(u, g, eps1);
  Eigen::VectorXd scale(n), rhs(n);
  for (int i = 0; i < n; ++i) {
    scale[i] = 1.0 + tau * alpha * b_tilde[i];
    double const f0 = lambda * F[i] + alpha * nu_prime[i];
    rhs[i] = scale[i] * (u[i] - tau * f0 / scale[i]);
  }
  Eigen::VectorXd total = Eigen::VectorXd::Zero(n);
  for (int axis : {0, 1}) {
    Eigen::MatrixXd M = -2.0 * tau * dense_operator(G, axis);
    M.diagonal() += scale;
    total += 0.5 * M.partialPivLu().solve(rhs);
  }
  ScalarField out(u.width(), u.height());
  for (int i = 0; i < n; ++i) out[i] = total[i];
  return out;
}

/// Uniform noise blurred to a smooth field and mapped onto [lo, hi].
inline ScalarField smooth_random_field(int w, int h, selseg::Rng& rng, double lo, double hi,
                                       double sigma) {
  ScalarField noise(w, h);
  for (double& v : noise) v = rng.uniform01();
  int const r = static_cast<int>(std::ceil(3 * sigma));
  std::vector<double> taps(2 * r + 1);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) sum += taps[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& t : taps) t /= sum;
  ScalarField s = convolve_direct(noise, taps);
  auto const [mn, mx] = std::minmax_element(s.begin(), s.end());
  double const a = *mn, b = *mx;
  for (double& v : s) v = lo + (hi - lo) * (v - a) / (b - a);
  return s;
}

}  // namespace oracle

#endif  // SELSEG_TESTS_ORACLES_HPP_

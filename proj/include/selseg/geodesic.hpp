#ifndef SELSEG_GEODESIC_HPP_
#define SELSEG_GEODESIC_HPP_

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <vector>

#include "selseg/filters.hpp"
#include "selseg/grid.hpp"

namespace selseg {

/// User input: marker points, the foreground region P derived from them and
/// an optional region forced to background.
struct MarkerInput {
  std::vector<Point> markers;
  BinaryMask region;
  std::optional<BinaryMask> hard_background;

  /// Throws InputError unless the invariants hold for a width x height domain.
  void validate(int width, int height) const {
    for (Point const& p : markers) {
      if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height) {
        throw InputError("marker outside the image domain");
      }
    }
    if (region.width() != width || region.height() != height) {
      throw InputError("marker region dimensions differ from the image");
    }
    if (count_ones(region) == 0) throw InputError("marker region is empty");
    if (hard_background) {
      require_same_shape(region, *hard_background, "hard background");
      for (std::size_t i = 0; i < region.size(); ++i) {
        if (region[i] && (*hard_background)[i]) {
          throw InputError("hard background overlaps the marker region");
        }
      }
    }
  }
};

/// Normalised distance penalty D in [0,1], zero on P.
struct DistanceField {
  ScalarField values;
};

struct GeodesicParams {
  double eps_d = 1e-3;
  double beta_g = 1000.0;
  /// q == 1: plain normalised Euclidean distance.
  bool euclidean = false;
  double tolerance = 1e-9;
  int max_passes = 50;
};

/// Local speed q = eps_D + beta_G |grad z|^2.
inline ScalarField edge_speed(GrayImage const& z, double eps_d, double beta_g) {
  if (!(eps_d > 0.0)) throw InputError("eps_D must be positive");
  if (!(beta_g >= 0.0)) throw InputError("beta_G must be non-negative");
  ScalarField q = gradient_norm_squared(z.field());
  for (double& v : q) v = eps_d + beta_g * v;
  return q;
}

namespace detail {

struct Upwind {
  double value;
  double speed;
};

inline Upwind neighbour(ScalarField const& d, ScalarField const& q, int x, int y) {
  if (!d.contains(x, y)) return {std::numeric_limits<double>::infinity(), 0.0};
  return {d(x, y), q(x, y)};
}

// Godunov upwind update for |grad D| = q on a stencil of spacing h. The speed
// is averaged between the node and the upwind neighbours that enter the
// update, which matches trapezoidal path integration of q.
inline double eikonal_update(Upwind a, Upwind b, double q, double h) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (a.value > b.value) std::swap(a, b);
  if (a.value == kInf) return kInf;
  double const one_sided = a.value + 0.5 * (q + a.speed) * h;
  if (b.value == kInf) return one_sided;
  double const q2 = 0.25 * (2.0 * q + a.speed + b.speed) * h;
  double const diff = b.value - a.value;
  if (diff >= q2) return one_sided;
  // Both candidates are monotone in q and in the neighbour values; so is the min.
  return std::min(one_sided, 0.5 * (a.value + b.value + std::sqrt(2.0 * q2 * q2 - diff * diff)));
}

// One Gauss-Seidel sweep. The update is the smallest candidate over every
// neighbour pair of the axis-aligned stencil and of the 45-degree rotated
// stencil (diagonal neighbours, h = sqrt 2). Speeds differ between neighbours,
// so the smaller neighbour value alone does not give the smaller candidate.
inline void sweep(ScalarField& d, ScalarField const& q, BinaryMask const& region,
                  int dx, int dy, double& max_change) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double const diag = std::sqrt(2.0);
  int const w = d.width();
  int const h = d.height();
  int const x0 = dx > 0 ? 0 : w - 1;
  int const y0 = dy > 0 ? 0 : h - 1;
  for (int yy = 0, y = y0; yy < h; ++yy, y += dy) {
    for (int xx = 0, x = x0; xx < w; ++xx, x += dx) {
      if (region(x, y)) continue;
      double const qv = q(x, y);
      Upwind const axis_a[2] = {neighbour(d, q, x - 1, y), neighbour(d, q, x + 1, y)};
      Upwind const axis_b[2] = {neighbour(d, q, x, y - 1), neighbour(d, q, x, y + 1)};
      Upwind const diag_a[2] = {neighbour(d, q, x - 1, y - 1), neighbour(d, q, x + 1, y + 1)};
      Upwind const diag_b[2] = {neighbour(d, q, x + 1, y - 1), neighbour(d, q, x - 1, y + 1)};
      double cand = kInf;
      for (Upwind const& a : axis_a) {
        for (Upwind const& b : axis_b) cand = std::min(cand, eikonal_update(a, b, qv, 1.0));
      }
      for (Upwind const& a : diag_a) {
        for (Upwind const& b : diag_b) cand = std::min(cand, eikonal_update(a, b, qv, diag));
      }
      double& cur = d(x, y);
      if (cand < cur) {
        max_change = std::max(max_change, cur == kInf ? kInf : cur - cand);
        cur = cand;
      }
    }
  }
}

// Integral of bilinearly interpolated q along the straight segment between
// two pixel centres (composite trapezoid rule).
inline double segment_integral(ScalarField const& q, int x0, int y0, int x1, int y1) {
  auto sample = [&](double x, double y) {
    int const ix = std::min(static_cast<int>(x), q.width() - 1);
    int const iy = std::min(static_cast<int>(y), q.height() - 1);
    int const jx = std::min(ix + 1, q.width() - 1);
    int const jy = std::min(iy + 1, q.height() - 1);
    double const fx = x - ix, fy = y - iy;
    return (1 - fx) * (1 - fy) * q(ix, iy) + fx * (1 - fy) * q(jx, iy) +
           (1 - fx) * fy * q(ix, jy) + fx * fy * q(jx, jy);
  };
  constexpr int kSteps = 16;
  double const len = std::hypot(x1 - x0, y1 - y0);
  double acc = 0.5 * (q(x0, y0) + q(x1, y1));
  for (int k = 1; k < kSteps; ++k) {
    double const t = static_cast<double>(k) / kSteps;
    acc += sample(x0 + t * (x1 - x0), y0 + t * (y1 - y0));
  }
  return acc * len / kSteps;
}

}  // namespace detail

/// Unnormalised distance D0 solving |grad D0| = q with D0 = 0 on the region.
///
/// Pixels within `source_radius` of the region start from the integral of q
/// along the straight segment to the nearest-cost region pixel. The sweeps
/// may still lower them; the seeding only removes the first-order error of
/// the upwind stencil around small sources. The rest is fast sweeping over
/// the four diagonal orderings until the largest change in a pass drops below
/// tolerance * max(1, max D0) or max_passes is reached.
inline ScalarField eikonal_distance(ScalarField const& q, BinaryMask const& region,
                                    double tolerance = 1e-9, int max_passes = 50,
                                    int source_radius = 4) {
  require_same_shape(q, region, "eikonal_distance");
  if (count_ones(region) == 0) throw InputError("marker region is empty");
  for (double v : q) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("speed q must be positive and finite");
  }
  int const w = q.width();
  int const h = q.height();
  ScalarField d(w, h, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (region[i]) d[i] = 0.0;
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!region(x, y)) continue;
      for (int sy = -source_radius; sy <= source_radius; ++sy) {
        for (int sx = -source_radius; sx <= source_radius; ++sx) {
          int const nx = x + sx, ny = y + sy;
          if (!d.contains(nx, ny) || region(nx, ny)) continue;
          double const len = std::hypot(sx, sy);
          if (len > source_radius) continue;
          d(nx, ny) = std::min(d(nx, ny), detail::segment_integral(q, x, y, nx, ny));
        }
      }
    }
  }
  static constexpr int kOrders[4][2] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  for (int pass = 0; pass < max_passes; ++pass) {
    double max_change = 0.0;
    for (auto const& o : kOrders) detail::sweep(d, q, region, o[0], o[1], max_change);
    double scale = 1.0;
    for (double v : d) scale = std::max(scale, v);
    if (max_change <= tolerance * scale) break;
  }
  return d;
}

/// Normalised geodesic distance from input.region; all zeros when the region
/// covers the whole domain.
inline DistanceField geodesic_distance(ScalarField const& q, MarkerInput const& input,
                                       GeodesicParams const& params = {}) {
  input.validate(q.width(), q.height());
  ScalarField speed = params.euclidean ? ScalarField(q.width(), q.height(), 1.0) : q;
  ScalarField d = eikonal_distance(speed, input.region, params.tolerance, params.max_passes);
  double const mx = max_abs(d);
  if (mx > 0.0) {
    for (double& v : d) v /= mx;
  }
  return {std::move(d)};
}

inline DistanceField geodesic_distance(GrayImage const& z, MarkerInput const& input,
                                       GeodesicParams const& params = {}) {
  return geodesic_distance(edge_speed(z, params.eps_d, params.beta_g), input, params);
}

namespace detail {

inline long long cross(Point o, Point a, Point b) {
  return static_cast<long long>(a.x - o.x) * (b.y - o.y) -
         static_cast<long long>(a.y - o.y) * (b.x - o.x);
}

// Andrew's monotone chain; collinear points are dropped, so a degenerate
// input yields its two extreme points.
inline std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

inline void draw_segment(BinaryMask& m, Point a, Point b) {
  int dx = std::abs(b.x - a.x), sx = a.x < b.x ? 1 : -1;
  int dy = -std::abs(b.y - a.y), sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    m(a.x, a.y) = 1;
    if (a == b) break;
    int const e2 = 2 * err;
    if (e2 >= dy) { err += dy; a.x += sx; }
    if (e2 <= dx) { err += dx; a.y += sy; }
  }
}

}  // namespace detail

/// Region P from markers: the filled convex hull for three or more markers,
/// the marker pixels themselves otherwise.
inline BinaryMask fill_polygon(std::vector<Point> const& markers, int width, int height) {
  if (markers.empty()) throw InputError("at least one marker is required");
  BinaryMask mask(width, height);
  for (Point const& p : markers) {
    if (!mask.contains(p)) throw InputError("marker outside the image domain");
  }
  if (markers.size() < 3) {
    for (Point const& p : markers) mask(p.x, p.y) = 1;
    return mask;
  }
  auto const hull = detail::convex_hull(markers);
  if (hull.size() == 1) {
    mask(hull[0].x, hull[0].y) = 1;
    return mask;
  }
  for (std::size_t i = 0; i < hull.size(); ++i) {
    detail::draw_segment(mask, hull[i], hull[(i + 1) % hull.size()]);
  }
  if (hull.size() >= 3) {
    int x_lo = width, x_hi = -1, y_lo = height, y_hi = -1;
    for (Point const& p : hull) {
      x_lo = std::min(x_lo, p.x); x_hi = std::max(x_hi, p.x);
      y_lo = std::min(y_lo, p.y); y_hi = std::max(y_hi, p.y);
    }
    for (int y = y_lo; y <= y_hi; ++y) {
      for (int x = x_lo; x <= x_hi; ++x) {
        bool inside = true;
        for (std::size_t i = 0; i < hull.size() && inside; ++i) {
          inside = detail::cross(hull[i], hull[(i + 1) % hull.size()], {x, y}) >= 0;
        }
        if (inside) mask(x, y) = 1;
      }
    }
  }
  return mask;
}

/// Builds a validated MarkerInput whose region is fill_polygon(markers).
inline MarkerInput make_marker_input(std::vector<Point> markers, int width, int height,
                                     std::optional<BinaryMask> hard_background = std::nullopt) {
  MarkerInput in;
  in.region = fill_polygon(markers, width, height);
  in.markers = std::move(markers);
  in.hard_background = std::move(hard_background);
  in.validate(width, height);
  return in;
}

}  // namespace selseg

#endif  // SELSEG_GEODESIC_HPP_

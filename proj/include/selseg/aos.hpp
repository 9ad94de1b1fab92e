#ifndef SELSEG_AOS_HPP_
#define SELSEG_AOS_HPP_

// Semi-implicit additive operator splitting step for
//   div(g grad u / |grad u|_eps1) - lambda F - alpha nu'(u) = 0
// with the penalty's linear Taylor term moved to the implicit side near 0 and 1.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "selseg/fitting.hpp"
#include "selseg/grid.hpp"
#include "selseg/penalty.hpp"

namespace selseg {

struct SolverConfig {
  double lambda_tilde = 5.0;
  double theta = 2.0;
  std::optional<double> alpha;  // absent: max(lambda, lambda/2 + 0.1)
  double tau = 1e-2;
  double eps1 = 1e-4;
  double eps2 = 1e-1;
  double zeta = 0.1;
  double edge_beta = 100.0;
  double tolerance = 1e-4;
  int max_iters = 2000;
  double gamma_threshold = 0.5;
  /// Outer iterations between coefficient re-estimates for iterative models.
  int update_every = 1;

  double effective_alpha() const {
    return alpha ? *alpha : std::max(lambda_tilde, 0.5 * lambda_tilde + 0.1);
  }

  void validate() const {
    if (!(lambda_tilde >= 0.0)) throw InputError("lambda_tilde must be >= 0");
    if (!(theta >= 0.0)) throw InputError("theta must be >= 0");
    if (!(tau > 0.0) || !(eps1 > 0.0) || !(eps2 > 0.0) || !(tolerance > 0.0)) {
      throw InputError("tau, eps1, eps2 and tolerance must be positive");
    }
    if (!(zeta > 0.0)) throw InputError("zeta must be positive");
    if (!(edge_beta >= 0.0)) throw InputError("edge_beta must be >= 0");
    if (!(gamma_threshold > 0.0 && gamma_threshold < 1.0)) {
      throw InputError("gamma_threshold must lie in (0,1)");
    }
    if (max_iters < 1) throw InputError("max_iters must be >= 1");
    if (update_every < 1) throw InputError("update_every must be >= 1");
    if (!(effective_alpha() > 0.5 * lambda_tilde)) {
      throw InputError("alpha must exceed lambda_tilde / 2");
    }
  }
};

enum class Axis { X, Y };

/// Rows i of a tridiagonal matrix: lower[i] A(i,i-1), diag[i] A(i,i),
/// upper[i] A(i,i+1). lower[0] and upper[n-1] are zero.
struct Tridiagonal {
  std::vector<double> lower, diag, upper;
  std::size_t size() const { return diag.size(); }
};

/// Thomas algorithm; the matrix must be non-singular without pivoting
/// (diagonally dominant systems qualify).
inline std::vector<double> solve_tridiagonal(Tridiagonal const& m, std::vector<double> rhs) {
  std::size_t const n = m.size();
  if (rhs.size() != n) throw InputError("tridiagonal system and rhs differ in size");
  if (n == 0) return rhs;
  std::vector<double> c(n);
  double denom = m.diag[0];
  c[0] = m.upper[0] / denom;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = m.diag[i] - m.lower[i] * c[i - 1];
    c[i] = m.upper[i] / denom;
    rhs[i] = (rhs[i] - m.lower[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
  return rhs;
}

/// G = g / sqrt(ux^2 + uy^2 + eps1^2), central differences.
inline ScalarField diffusivity(ScalarField const& u, ScalarField const& g, double eps1) {
  require_same_shape(u, g, "diffusivity");
  int const w = u.width(), h = u.height();
  ScalarField out(w, h);
  for (int y = 0; y < h; ++y) {
    int const up = std::max(y - 1, 0), down = std::min(y + 1, h - 1);
    for (int x = 0; x < w; ++x) {
      int const left = std::max(x - 1, 0), right = std::min(x + 1, w - 1);
      double const ux = 0.5 * (u(right, y) - u(left, y));
      double const uy = 0.5 * (u(x, down) - u(x, up));
      out(x, y) = g(x, y) / std::sqrt(ux * ux + uy * uy + eps1 * eps1);
    }
  }
  return out;
}

/// Discrete d/dl (G d/dl) along every grid line of one axis: half-point
/// diffusivities (G_i + G_{i+1})/2 and zero flux past the ends. Lines are
/// rows for Axis::X (indexed by y) and columns for Axis::Y (indexed by x).
inline std::vector<Tridiagonal> line_systems_from_diffusivity(ScalarField const& G, Axis axis) {
  int const lines = axis == Axis::X ? G.height() : G.width();
  int const n = axis == Axis::X ? G.width() : G.height();
  std::vector<Tridiagonal> out(lines);
  for (int l = 0; l < lines; ++l) {
    auto at = [&](int i) { return axis == Axis::X ? G(i, l) : G(l, i); };
    Tridiagonal& t = out[l];
    t.lower.assign(n, 0.0);
    t.diag.assign(n, 0.0);
    t.upper.assign(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) {
      double const w = 0.5 * (at(i) + at(i + 1));
      t.upper[i] = w;
      t.lower[i + 1] = w;
      t.diag[i] -= w;
      t.diag[i + 1] -= w;
    }
  }
  return out;
}

inline std::vector<Tridiagonal> assemble_line_systems(ScalarField const& u, ScalarField const& g,
                                                      double eps1, Axis axis) {
  return line_systems_from_diffusivity(diffusivity(u, g, eps1), axis);
}

/// b where u lies within zeta of 0 or 1, else 0.
inline ScalarField activation_mask(ScalarField const& u, double zeta, double b) {
  if (!(zeta > 0.0)) throw InputError("zeta must be positive");
  ScalarField out(u.width(), u.height());
  for (std::size_t i = 0; i < u.size(); ++i) {
    double const v = u[i];
    bool const near0 = v >= -zeta && v <= zeta;
    bool const near1 = v >= 1.0 - zeta && v <= 1.0 + zeta;
    out[i] = near0 || near1 ? b : 0.0;
  }
  return out;
}

inline ScalarField activation_mask(ScalarField const& u, double zeta, SolverConfig const& cfg) {
  return activation_mask(u, zeta, penalty::linear_taylor_coefficient(cfg.eps2));
}

/// One modified AOS update:
///   u~ = u - tau (I + B)^-1 f0,  f0 = lambda F + alpha nu'(u),  B = tau alpha b~
///   u' = 1/2 sum_l ((I + B) - 2 tau A_l)^-1 (I + B) u~
inline ScalarField aos_step(ScalarField const& u, CombinedField const& F, ScalarField const& g,
                            SolverConfig const& cfg) {
  require_same_shape(u, F.values, "aos_step");
  require_same_shape(u, g, "aos_step");
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]) || !std::isfinite(F.values[i]) || !std::isfinite(g[i])) {
      throw InputError("aos_step: non-finite input");
    }
  }
  double const alpha = cfg.effective_alpha();
  double const tau = cfg.tau;
  double const b = penalty::linear_taylor_coefficient(cfg.eps2);
  ScalarField const active = activation_mask(u, cfg.zeta, b);
  ScalarField scale(u.width(), u.height());  // diagonal of I + B
  ScalarField rhs(u.width(), u.height());    // (I + B) u~
  for (std::size_t i = 0; i < u.size(); ++i) {
    scale[i] = 1.0 + tau * alpha * active[i];
    double const f0 = cfg.lambda_tilde * F.values[i] + alpha * penalty::nu_prime(u[i], cfg.eps2);
    rhs[i] = scale[i] * u[i] - tau * f0;
  }
  ScalarField const G = diffusivity(u, g, cfg.eps1);
  // Each line system is (I + B) + 2 tau (coupling Laplacian); w holds the
  // scaled half-point couplings, c and v the Thomas sweep with the sign of
  // the off-diagonals folded in.
  int const width = u.width(), height = u.height();
  double const k = tau;  // 2 tau * half-point mean 1/2
  ScalarField out(width, height, 0.0);

  std::vector<double> w(width), c(width), v(width);
  for (int y = 0; y < height; ++y) {
    std::size_t const row = u.index(0, y);
    for (int x = 0; x + 1 < width; ++x) w[x] = k * (G[row + x] + G[row + x + 1]);
    double left = 0.0;
    for (int x = 0; x < width; ++x) {
      double const right = x + 1 < width ? w[x] : 0.0;
      double const inv = 1.0 / (scale[row + x] + left + right - (x > 0 ? left * c[x - 1] : 0.0));
      c[x] = right * inv;
      v[x] = (rhs[row + x] + (x > 0 ? left * v[x - 1] : 0.0)) * inv;
      left = right;
    }
    for (int x = width - 1; x-- > 0;) v[x] += c[x] * v[x + 1];
    for (int x = 0; x < width; ++x) out[row + x] = 0.5 * v[x];
  }

  // Columns, swept a row at a time across all columns.
  ScalarField cc(width, height), vv(width, height);
  std::vector<double> upper(width, 0.0), lower(width, 0.0);
  for (int y = 0; y < height; ++y) {
    std::size_t const row = u.index(0, y);
    for (int x = 0; x < width; ++x) {
      lower[x] = upper[x];
      upper[x] = y + 1 < height ? k * (G[row + x] + G[row + width + x]) : 0.0;
      double denom = scale[row + x] + lower[x] + upper[x];
      double r = rhs[row + x];
      if (y > 0) {
        denom -= lower[x] * cc[row - width + x];
        r += lower[x] * vv[row - width + x];
      }
      double const inv = 1.0 / denom;
      cc[row + x] = upper[x] * inv;
      vv[row + x] = r * inv;
    }
  }
  for (int y = height - 1; y-- > 0;) {
    std::size_t const row = u.index(0, y);
    for (int x = 0; x < width; ++x) vv[row + x] += cc[row + x] * vv[row + width + x];
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += 0.5 * vv[i];
  return out;
}

}  // namespace selseg

#endif  // SELSEG_AOS_HPP_

#ifndef SELSEG_PENALTY_HPP_
#define SELSEG_PENALTY_HPP_

// Regularised exact penalty nu(u) = H(b(u)) b(u) keeping the relaxed
// indicator inside [0,1], with b(u) = sqrt((2u-1)^2 + eps) - 1 and
// H(v) = (1 + (2/pi) atan(v/eps)) / 2.

#include <cmath>
#include <numbers>

namespace selseg::penalty {

struct Terms {
  double b, db, d2b;   // b(u) and its u-derivatives
  double h, dh, d2h;   // H and its derivatives, evaluated at b(u)
};

inline Terms terms(double u, double eps) {
  double const s = 2.0 * u - 1.0;
  double const r = std::sqrt(s * s + eps);
  Terms t{};
  t.b = r - 1.0;
  t.db = 2.0 * s / r;
  t.d2b = 4.0 * eps / (r * r * r);
  double const denom = eps * eps + t.b * t.b;
  t.h = 0.5 * (1.0 + (2.0 / std::numbers::pi) * std::atan(t.b / eps));
  t.dh = eps / (std::numbers::pi * denom);
  t.d2h = -2.0 * eps * t.b / (std::numbers::pi * denom * denom);
  return t;
}

inline double nu(double u, double eps) {
  Terms const t = terms(u, eps);
  return t.h * t.b;
}

/// nu'(u) = b'(u) [H'(b) b + H(b)].
inline double nu_prime(double u, double eps) {
  Terms const t = terms(u, eps);
  return t.db * (t.dh * t.b + t.h);
}

/// nu''(u) = b'' [H'(b) b + H(b)] + b'^2 [H''(b) b + 2 H'(b)].
inline double nu_second(double u, double eps) {
  Terms const t = terms(u, eps);
  return t.d2b * (t.dh * t.b + t.h) + t.db * t.db * (t.d2h * t.b + 2.0 * t.dh);
}

/// Linear coefficient of the Taylor expansion of nu' about u = 0. nu is
/// symmetric about 1/2, so the expansion about u = 1 has the same one.
inline double linear_taylor_coefficient(double eps) { return nu_second(0.0, eps); }

}  // namespace selseg::penalty

#endif  // SELSEG_PENALTY_HPP_

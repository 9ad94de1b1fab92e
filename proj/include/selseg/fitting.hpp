#ifndef SELSEG_FITTING_HPP_
#define SELSEG_FITTING_HPP_

// Fitting fields f(x) for the supported two-phase models. Negative values
// pull a pixel toward the foreground, positive values toward the background.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "selseg/filters.hpp"
#include "selseg/geodesic.hpp"
#include "selseg/grid.hpp"
#include "selseg/otsu.hpp"

namespace selseg {

enum class Model { CV, RSF, LCV, HYB, GAV, PM };

inline std::string_view model_name(Model m) {
  switch (m) {
    case Model::CV: return "CV";
    case Model::RSF: return "RSF";
    case Model::LCV: return "LCV";
    case Model::HYB: return "HYB";
    case Model::GAV: return "GAV";
    case Model::PM: return "PM";
  }
  return "?";
}

inline Model parse_model(std::string_view name) {
  std::string upper(name);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (Model m : {Model::CV, Model::RSF, Model::LCV, Model::HYB, Model::GAV, Model::PM}) {
    if (upper == model_name(m)) return m;
  }
  throw InputError("unknown model '" + std::string(name) + "'");
}

/// Model selector plus every model's parameters; only the ones relevant to
/// `model` are read.
struct FittingSpec {
  Model model = Model::PM;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double rsf_sigma = 3.0;
  double lcv_alpha = 1.0;
  double lcv_beta = 1.0;
  int lcv_window = 15;
  double gav_beta1 = 1.0;
  double gav_beta2 = 1.0;
  std::optional<double> pm_gamma1;  // absent: chosen from Otsu thresholds
  std::optional<double> pm_gamma2;
  // Fixed intensity constants. CV honours both, PM honours c1; absent values
  // come from the marker region.
  std::optional<double> c1;
  std::optional<double> c2;
  int otsu_classes = 3;

  void validate() const {
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw InputError("lambda1/lambda2 must be >= 0");
    switch (model) {
      case Model::RSF:
        if (!(rsf_sigma > 0.0)) throw InputError("rsf_sigma must be positive");
        break;
      case Model::LCV:
      case Model::HYB:
        if (lcv_window < 3 || lcv_window % 2 == 0) {
          throw InputError("lcv_window must be an odd integer >= 3");
        }
        if (!(lcv_alpha >= 0.0) || !(lcv_beta >= 0.0)) {
          throw InputError("lcv_alpha/lcv_beta must be >= 0");
        }
        break;
      case Model::GAV:
        if (!std::isfinite(gav_beta1) || !std::isfinite(gav_beta2)) {
          throw InputError("gav betas must be finite");
        }
        break;
      case Model::PM:
        for (auto const& g : {pm_gamma1, pm_gamma2}) {
          if (g && !(*g > 0.0 && *g <= 1.0)) throw InputError("pm gammas must lie in (0,1]");
        }
        if (otsu_classes < 2) throw InputError("otsu_classes must be >= 2");
        break;
      case Model::CV:
        break;
    }
    for (auto const& c : {c1, c2}) {
      if (c && !(*c >= 0.0 && *c <= 1.0)) throw InputError("fixed constants must lie in [0,1]");
    }
  }
};

struct IntensityConstants {
  double c1 = 0.0;
  std::optional<double> c2;
  std::optional<ScalarField> h1, h2;  // RSF
  std::optional<double> d1, d2;       // LCV, HYB
  std::optional<GammaPair> gammas;    // PM
};

/// F = r / max|r| with r = theta D + f.
struct CombinedField {
  ScalarField values;
  double theta = 0.0;
};

inline constexpr double kDenominatorFloor = 1e-12;

inline double mean(ScalarField const& f) {
  double sum = 0.0;
  for (double v : f) sum += v;
  return sum / static_cast<double>(f.size());
}

/// Mean of f over pixels where mask == label; the global mean if there are none.
inline double masked_mean(ScalarField const& f, BinaryMask const& mask, std::uint8_t label) {
  require_same_shape(f, mask, "fitting");
  double sum = 0.0, count = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if ((mask[i] != 0) == (label != 0)) {
      sum += f[i];
      count += 1.0;
    }
  }
  return count < kDenominatorFloor ? mean(f) : sum / count;
}

inline double c1_from_region(GrayImage const& z, BinaryMask const& region) {
  require_same_shape(z.field(), region, "fitting");
  if (count_ones(region) == 0) throw InputError("marker region is empty");
  return masked_mean(z.field(), region, 1);
}

// ---------------------------------------------------------------- CV / GAV

inline ScalarField cv_field(GrayImage const& z, double c1, double c2, double lambda1,
                            double lambda2) {
  ScalarField f(z.width(), z.height());
  for (std::size_t i = 0; i < f.size(); ++i) {
    double const a = z[i] - c1;
    double const b = z[i] - c2;
    f[i] = lambda1 * a * a - lambda2 * b * b;
  }
  return f;
}

inline constexpr double kGavFloor = 1e-6;

namespace detail {

// sum z^beta w / sum z^(beta-1) w over pixels with the given label.
inline double generalized_average(ScalarField const& z, BinaryMask const& mask,
                                  std::uint8_t label, double beta) {
  auto power = [](double v, double e) {
    if (e < 0.0) v = std::clamp(v, kGavFloor, 1.0);
    return std::pow(v, e);
  };
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if ((mask[i] != 0) != (label != 0)) continue;
    double const v = std::clamp(z[i], 0.0, 1.0);
    num += power(v, beta);
    den += power(v, beta - 1.0);
  }
  if (den < kDenominatorFloor) return mean(z);
  return num / den;
}

}  // namespace detail

struct ConstantPair {
  double c1;
  double c2;
};

/// Generalised-average constants. With beta = 1 these are the masked means.
/// z is floored at 1e-6 wherever it is raised to a negative power.
inline ConstantPair gav_update(GrayImage const& z, BinaryMask const& u_gamma, double beta1,
                               double beta2) {
  require_same_shape(z.field(), u_gamma, "fitting");
  return {detail::generalized_average(z.field(), u_gamma, 1, beta1),
          detail::generalized_average(z.field(), u_gamma, 0, beta2)};
}

// ---------------------------------------------------------------------- PM

/// Asymmetric tent: 1 at c1, falling linearly to 0 at c1 - gamma1 and c1 + gamma2.
inline double pm_tilde_f2(double z, double c1, double gamma1, double gamma2) {
  if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) throw InputError("pm gammas must be positive");
  if (z >= c1 - gamma1 && z <= c1) return 1.0 + (z - c1) / gamma1;
  if (z > c1 && z <= c1 + gamma2) return 1.0 - (z - c1) / gamma2;
  return 0.0;
}

inline ScalarField pm_field(GrayImage const& z, double c1, double gamma1, double gamma2,
                            double lambda1, double lambda2) {
  if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) throw InputError("pm gammas must be positive");
  ScalarField f(z.width(), z.height());
  for (std::size_t i = 0; i < f.size(); ++i) {
    double const a = z[i] - c1;
    f[i] = lambda1 * a * a - lambda2 * pm_tilde_f2(z[i], c1, gamma1, gamma2);
  }
  return f;
}

// --------------------------------------------------------------------- RSF

struct LocalFits {
  ScalarField h1;
  ScalarField h2;
};

namespace detail {

inline ScalarField product(ScalarField const& a, ScalarField const& b) {
  ScalarField out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

inline ScalarField indicator(BinaryMask const& mask, std::uint8_t label) {
  ScalarField out(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    out[i] = (mask[i] != 0) == (label != 0) ? 1.0 : 0.0;
  }
  return out;
}

}  // namespace detail

/// h = K*(chi z) / K*chi per phase; where K*chi vanishes, the global mean of z.
inline LocalFits rsf_update(GrayImage const& z, BinaryMask const& u_gamma, double sigma) {
  require_same_shape(z.field(), u_gamma, "fitting");
  auto const taps = gaussian_kernel(sigma);
  double const global = mean(z.field());
  auto local = [&](std::uint8_t label) {
    ScalarField const chi = detail::indicator(u_gamma, label);
    ScalarField const num = separable_filter(detail::product(chi, z.field()), taps);
    ScalarField const den = separable_filter(chi, taps);
    ScalarField h(z.width(), z.height());
    for (std::size_t i = 0; i < h.size(); ++i) {
      h[i] = den[i] < kDenominatorFloor ? global : num[i] / den[i];
    }
    return h;
  };
  return {local(1), local(0)};
}

/// Kernel-weighted local squared error: K*z^2 - 2h K*z + h^2 K*1 per phase.
inline ScalarField rsf_field(GrayImage const& z, ScalarField const& h1, ScalarField const& h2,
                             double sigma, double lambda1, double lambda2) {
  require_same_shape(z.field(), h1, "fitting");
  require_same_shape(z.field(), h2, "fitting");
  auto const taps = gaussian_kernel(sigma);
  ScalarField const kz = separable_filter(z.field(), taps);
  ScalarField const kz2 = separable_filter(detail::product(z.field(), z.field()), taps);
  ScalarField const k1 = separable_filter(ScalarField(z.width(), z.height(), 1.0), taps);
  ScalarField f(z.width(), z.height());
  for (std::size_t i = 0; i < f.size(); ++i) {
    double const e1 = kz2[i] - 2.0 * h1[i] * kz[i] + h1[i] * h1[i] * k1[i];
    double const e2 = kz2[i] - 2.0 * h2[i] * kz[i] + h2[i] * h2[i] * k1[i];
    f[i] = lambda1 * e1 - lambda2 * e2;
  }
  return f;
}

// --------------------------------------------------------------- LCV / HYB

struct LocalContrastConstants {
  double c1, c2, d1, d2;
};

namespace detail {

inline ScalarField difference(ScalarField const& a, ScalarField const& b) {
  ScalarField out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

// Two-term fit on an image v and its smoothed version vs.
inline ScalarField local_contrast_field(ScalarField const& v, ScalarField const& vs,
                                        LocalContrastConstants const& k, double alpha,
                                        double beta) {
  ScalarField f(v.width(), v.height());
  for (std::size_t i = 0; i < f.size(); ++i) {
    double const diff = vs[i] - v[i];
    double const a1 = v[i] - k.c1, a2 = v[i] - k.c2;
    double const b1 = diff - k.d1, b2 = diff - k.d2;
    f[i] = alpha * a1 * a1 + beta * b1 * b1 - (alpha * a2 * a2 + beta * b2 * b2);
  }
  return f;
}

inline LocalContrastConstants local_contrast_update(ScalarField const& v, ScalarField const& vs,
                                                    BinaryMask const& u_gamma) {
  ScalarField const diff = difference(vs, v);
  return {masked_mean(v, u_gamma, 1), masked_mean(v, u_gamma, 0), masked_mean(diff, u_gamma, 1),
          masked_mean(diff, u_gamma, 0)};
}

// w = (M_k z) z, the product image.
inline ScalarField hybrid_image(GrayImage const& z, int k) {
  return product(box_mean(z.field(), k), z.field());
}

}  // namespace detail

/// Local-contrast fit on z and z* = M_k z (k x k box mean).
inline ScalarField lcv_field(GrayImage const& z, LocalContrastConstants const& k, double alpha,
                             double beta, int window) {
  return detail::local_contrast_field(z.field(), box_mean(z.field(), window), k, alpha, beta);
}

inline LocalContrastConstants lcv_update(GrayImage const& z, BinaryMask const& u_gamma,
                                         int window) {
  require_same_shape(z.field(), u_gamma, "fitting");
  return detail::local_contrast_update(z.field(), box_mean(z.field(), window), u_gamma);
}

/// The local-contrast fit applied to w = (M_k z) z and w* = M_k w.
inline ScalarField hyb_field(GrayImage const& z, LocalContrastConstants const& k, double alpha,
                             double beta, int window) {
  ScalarField const w = detail::hybrid_image(z, window);
  return detail::local_contrast_field(w, box_mean(w, window), k, alpha, beta);
}

inline LocalContrastConstants hyb_update(GrayImage const& z, BinaryMask const& u_gamma,
                                         int window) {
  require_same_shape(z.field(), u_gamma, "fitting");
  ScalarField const w = detail::hybrid_image(z, window);
  return detail::local_contrast_update(w, box_mean(w, window), u_gamma);
}

// ------------------------------------------------------------ dispatchers

/// True for models whose constants are re-estimated from the current mask.
inline bool is_iterative(Model m) {
  return m == Model::RSF || m == Model::LCV || m == Model::HYB || m == Model::GAV;
}

/// Constants of an iterative model estimated from the mask u_gamma.
inline IntensityConstants update_constants(GrayImage const& z, BinaryMask const& u_gamma,
                                           FittingSpec const& spec) {
  IntensityConstants k;
  switch (spec.model) {
    case Model::RSF: {
      LocalFits fits = rsf_update(z, u_gamma, spec.rsf_sigma);
      k.c1 = masked_mean(z.field(), u_gamma, 1);
      k.h1 = std::move(fits.h1);
      k.h2 = std::move(fits.h2);
      break;
    }
    case Model::LCV:
    case Model::HYB: {
      auto const lc = spec.model == Model::LCV ? lcv_update(z, u_gamma, spec.lcv_window)
                                               : hyb_update(z, u_gamma, spec.lcv_window);
      k.c1 = lc.c1;
      k.c2 = lc.c2;
      k.d1 = lc.d1;
      k.d2 = lc.d2;
      break;
    }
    case Model::GAV: {
      auto const c = gav_update(z, u_gamma, spec.gav_beta1, spec.gav_beta2);
      k.c1 = c.c1;
      k.c2 = c.c2;
      break;
    }
    case Model::CV:
    case Model::PM:
      throw InputError("update_constants called for a non-iterative model");
  }
  return k;
}

/// Constants before the first iteration, taken from the marker region.
inline IntensityConstants initial_constants(GrayImage const& z, BinaryMask const& region,
                                            FittingSpec const& spec) {
  spec.validate();
  if (is_iterative(spec.model)) return update_constants(z, region, spec);
  IntensityConstants k;
  k.c1 = spec.c1 ? *spec.c1 : c1_from_region(z, region);
  if (spec.model == Model::CV) {
    k.c2 = spec.c2 ? *spec.c2 : masked_mean(z.field(), region, 0);
    return k;
  }
  GammaPair g{};
  if (!spec.pm_gamma1 || !spec.pm_gamma2) {
    g = select_gammas(k.c1, otsu_thresholds(z, spec.otsu_classes));
  }
  if (spec.pm_gamma1) g.gamma1 = *spec.pm_gamma1;
  if (spec.pm_gamma2) g.gamma2 = *spec.pm_gamma2;
  k.gammas = g;
  return k;
}

inline ScalarField fitting_field(GrayImage const& z, IntensityConstants const& k,
                                 FittingSpec const& spec) {
  auto need = [](auto const& opt, char const* what) -> auto const& {
    if (!opt) throw InputError(std::string("missing constant ") + what);
    return *opt;
  };
  switch (spec.model) {
    case Model::CV:
    case Model::GAV:
      return cv_field(z, k.c1, need(k.c2, "c2"), spec.lambda1, spec.lambda2);
    case Model::PM: {
      GammaPair const& g = need(k.gammas, "gammas");
      return pm_field(z, k.c1, g.gamma1, g.gamma2, spec.lambda1, spec.lambda2);
    }
    case Model::RSF:
      return rsf_field(z, need(k.h1, "h1"), need(k.h2, "h2"), spec.rsf_sigma, spec.lambda1,
                       spec.lambda2);
    case Model::LCV:
    case Model::HYB: {
      LocalContrastConstants const lc{k.c1, need(k.c2, "c2"), need(k.d1, "d1"),
                                      need(k.d2, "d2")};
      return spec.model == Model::LCV
                 ? lcv_field(z, lc, spec.lcv_alpha, spec.lcv_beta, spec.lcv_window)
                 : hyb_field(z, lc, spec.lcv_alpha, spec.lcv_beta, spec.lcv_window);
    }
  }
  throw InputError("unknown model");
}

/// r = theta D + f rescaled to unit sup norm; hard-background pixels forced to +1.
inline CombinedField combine(ScalarField const& f, DistanceField const& distance, double theta,
                             BinaryMask const* hard_background = nullptr) {
  require_same_shape(f, distance.values, "fitting");
  if (!(theta >= 0.0)) throw InputError("theta must be >= 0");
  ScalarField r(f.width(), f.height());
  // A vanishing fitting term leaves D / |D|_inf for every theta > 0.
  bool const pure_distance = theta > 0.0 && max_abs(f) == 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = pure_distance ? distance.values[i] : theta * distance.values[i] + f[i];
  }
  double const norm = max_abs(r);
  if (norm > 0.0) {
    for (double& v : r) v /= norm;
  }
  if (hard_background) {
    require_same_shape(r, *hard_background, "fitting");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if ((*hard_background)[i]) r[i] = 1.0;
    }
  }
  return {std::move(r), theta};
}

}  // namespace selseg

#endif  // SELSEG_FITTING_HPP_

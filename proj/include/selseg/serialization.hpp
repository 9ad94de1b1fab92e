#ifndef SELSEG_SERIALIZATION_HPP_
#define SELSEG_SERIALIZATION_HPP_

// JSON forms of markers, FittingSpec and SolverConfig. Omitted keys keep
// their defaults; unknown keys are rejected.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "selseg/aos.hpp"
#include "selseg/fitting.hpp"
#include "selseg/grid.hpp"

namespace selseg {

using nlohmann::json;

namespace detail {

inline void reject_unknown_keys(json const& j, std::set<std::string> const& known,
                                char const* what) {
  if (!j.is_object()) throw InputError(std::string(what) + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      throw InputError(std::string(what) + ": unknown key '" + it.key() + "'");
    }
  }
}

template <typename T>
void read_key(json const& j, char const* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (json::exception const&) {
    throw InputError(std::string("bad value for '") + key + "'");
  }
}

inline void read_optional(json const& j, char const* key, std::optional<double>& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (it->is_null()) {
    out.reset();
  } else if (it->is_number()) {
    out = it->get<double>();
  } else {
    throw InputError(std::string("bad value for '") + key + "'");
  }
}

inline json optional_json(std::optional<double> const& v) { return v ? json(*v) : json(nullptr); }

}  // namespace detail

/// [[x, y], ...]
inline json points_to_json(std::vector<Point> const& points) {
  json out = json::array();
  for (Point const& p : points) out.push_back({p.x, p.y});
  return out;
}

inline std::vector<Point> points_from_json(json const& j) {
  if (!j.is_array()) throw InputError("points must be a JSON array of [x, y] pairs");
  std::vector<Point> out;
  for (json const& item : j) {
    if (!item.is_array() || item.size() != 2 || !item[0].is_number_integer() ||
        !item[1].is_number_integer()) {
      throw InputError("each point must be an [x, y] pair of integers");
    }
    out.push_back({item[0].get<int>(), item[1].get<int>()});
  }
  return out;
}

inline json to_json(FittingSpec const& s) {
  return {
      {"model", std::string(model_name(s.model))},
      {"lambda1", s.lambda1},
      {"lambda2", s.lambda2},
      {"rsf_sigma", s.rsf_sigma},
      {"lcv_alpha", s.lcv_alpha},
      {"lcv_beta", s.lcv_beta},
      {"lcv_window", s.lcv_window},
      {"gav_beta1", s.gav_beta1},
      {"gav_beta2", s.gav_beta2},
      {"gamma1", detail::optional_json(s.pm_gamma1)},
      {"gamma2", detail::optional_json(s.pm_gamma2)},
      {"c1", detail::optional_json(s.c1)},
      {"c2", detail::optional_json(s.c2)},
      {"otsu_classes", s.otsu_classes},
  };
}

inline FittingSpec fitting_spec_from_json(json const& j) {
  detail::reject_unknown_keys(j,
                              {"model", "lambda1", "lambda2", "rsf_sigma", "lcv_alpha",
                               "lcv_beta", "lcv_window", "gav_beta1", "gav_beta2", "gamma1",
                               "gamma2", "c1", "c2", "otsu_classes"},
                              "fitting");
  FittingSpec s;
  if (auto it = j.find("model"); it != j.end()) {
    if (!it->is_string()) throw InputError("model must be a string");
    s.model = parse_model(it->get<std::string>());
  }
  detail::read_key(j, "lambda1", s.lambda1);
  detail::read_key(j, "lambda2", s.lambda2);
  detail::read_key(j, "rsf_sigma", s.rsf_sigma);
  detail::read_key(j, "lcv_alpha", s.lcv_alpha);
  detail::read_key(j, "lcv_beta", s.lcv_beta);
  detail::read_key(j, "lcv_window", s.lcv_window);
  detail::read_key(j, "gav_beta1", s.gav_beta1);
  detail::read_key(j, "gav_beta2", s.gav_beta2);
  detail::read_optional(j, "gamma1", s.pm_gamma1);
  detail::read_optional(j, "gamma2", s.pm_gamma2);
  detail::read_optional(j, "c1", s.c1);
  detail::read_optional(j, "c2", s.c2);
  detail::read_key(j, "otsu_classes", s.otsu_classes);
  s.validate();
  return s;
}

inline json to_json(SolverConfig const& c) {
  return {
      {"lambda_tilde", c.lambda_tilde},
      {"theta", c.theta},
      {"alpha", detail::optional_json(c.alpha)},
      {"tau", c.tau},
      {"eps1", c.eps1},
      {"eps2", c.eps2},
      {"zeta", c.zeta},
      {"edge_beta", c.edge_beta},
      {"tolerance", c.tolerance},
      {"max_iters", c.max_iters},
      {"gamma_threshold", c.gamma_threshold},
      {"update_every", c.update_every},
  };
}

/// Starts from `base` so callers can layer overrides on their own defaults.
inline SolverConfig solver_config_from_json(json const& j, SolverConfig base = {}) {
  detail::reject_unknown_keys(j,
                              {"lambda_tilde", "theta", "alpha", "tau", "eps1", "eps2", "zeta",
                               "edge_beta", "tolerance", "max_iters", "gamma_threshold",
                               "update_every"},
                              "solver");
  detail::read_key(j, "lambda_tilde", base.lambda_tilde);
  detail::read_key(j, "theta", base.theta);
  detail::read_optional(j, "alpha", base.alpha);
  detail::read_key(j, "tau", base.tau);
  detail::read_key(j, "eps1", base.eps1);
  detail::read_key(j, "eps2", base.eps2);
  detail::read_key(j, "zeta", base.zeta);
  detail::read_key(j, "edge_beta", base.edge_beta);
  detail::read_key(j, "tolerance", base.tolerance);
  detail::read_key(j, "max_iters", base.max_iters);
  detail::read_key(j, "gamma_threshold", base.gamma_threshold);
  detail::read_key(j, "update_every", base.update_every);
  base.validate();
  return base;
}

/// Marker file: either a bare point array or
/// {"markers": [[x, y], ...], "hard_background": [[x, y], ...]}.
struct MarkerFile {
  std::vector<Point> markers;
  std::vector<Point> hard_background;
};

inline MarkerFile marker_file_from_json(json const& j) {
  MarkerFile out;
  if (j.is_array()) {
    out.markers = points_from_json(j);
    return out;
  }
  detail::reject_unknown_keys(j, {"markers", "hard_background"}, "marker file");
  if (!j.contains("markers")) throw InputError("marker file has no 'markers'");
  out.markers = points_from_json(j.at("markers"));
  if (j.contains("hard_background")) out.hard_background = points_from_json(j.at("hard_background"));
  return out;
}

inline json to_json(MarkerFile const& m) {
  json out = {{"markers", points_to_json(m.markers)}};
  if (!m.hard_background.empty()) out["hard_background"] = points_to_json(m.hard_background);
  return out;
}

/// Rasterises a point list into a mask; points must lie in the domain.
inline BinaryMask points_to_mask(std::vector<Point> const& points, int width, int height) {
  BinaryMask m(width, height);
  for (Point const& p : points) {
    if (!m.contains(p)) throw InputError("point outside the image domain");
    m(p.x, p.y) = 1;
  }
  return m;
}

}  // namespace selseg

#endif  // SELSEG_SERIALIZATION_HPP_

#ifndef SELSEG_HARNESS_HPP_
#define SELSEG_HARNESS_HPP_

// Synthetic fixtures and the two experimental protocols: (lambda, theta)
// heatmap sweeps and random three-marker robustness studies.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "selseg/geodesic.hpp"
#include "selseg/image_io.hpp"
#include "selseg/metrics.hpp"
#include "selseg/rng.hpp"
#include "selseg/solver.hpp"

namespace selseg {

struct Fixture {
  GrayImage image;
  BinaryMask gt;
  MarkerInput input;
  BinaryMask distractor;  // second object of the target's intensity, empty if none
};

inline std::vector<std::string> fixture_names() {
  return {"disc", "two-equal", "contrast", "noisy-two-equal"};
}

namespace detail {

struct Disc {
  double cx, cy, r;
  bool contains(int x, int y) const {
    double const dx = x + 0.5 - cx, dy = y + 0.5 - cy;
    return dx * dx + dy * dy <= r * r;
  }
};

// Three markers well inside a disc.
inline std::vector<Point> interior_markers(Disc const& d) {
  auto at = [&](double fx, double fy) {
    return Point{static_cast<int>(std::floor(d.cx + fx * d.r)),
                 static_cast<int>(std::floor(d.cy + fy * d.r))};
  };
  return {at(-0.3, -0.3), at(0.35, -0.15), at(0.0, 0.35)};
}

}  // namespace detail

/// Deterministic synthetic scenes on a size x size grid (size >= 32):
///  disc             target disc 0.5 on 0.0
///  two-equal        target and distractor discs of 0.5; background 0.0 on
///                   the target's half and 1.0 on the distractor's half, so
///                   the mean outside the target is also 0.5
///  contrast         target disc 0.75 on 0.49
///  noisy-two-equal  two-equal plus N(0, 0.05^2) noise, clipped to [0,1]
inline Fixture make_fixture(std::string const& kind, int size, std::uint64_t seed = 1) {
  if (size < 32) throw InputError("fixture size must be >= 32");
  double const n = size;
  bool const two = kind == "two-equal" || kind == "noisy-two-equal";
  if (!two && kind != "disc" && kind != "contrast") {
    throw InputError("unknown fixture '" + kind + "'");
  }
  detail::Disc const target = two ? detail::Disc{n / 4, n / 2, 0.16 * n}
                                   : detail::Disc{n / 2, n / 2, 0.25 * n};
  detail::Disc const other{3 * n / 4, n / 2, 0.16 * n};
  double const fg = kind == "contrast" ? 0.75 : 0.5;

  ScalarField z(size, size);
  BinaryMask gt(size, size), distractor(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double v = kind == "contrast" ? 0.49 : 0.0;
      if (two && x >= size / 2) v = 1.0;
      if (target.contains(x, y)) {
        v = fg;
        gt(x, y) = 1;
      } else if (two && other.contains(x, y)) {
        v = fg;
        distractor(x, y) = 1;
      }
      z(x, y) = v;
    }
  }
  if (kind == "noisy-two-equal") {
    Rng rng(seed);
    for (double& v : z) v = std::clamp(v + 0.05 * rng.normal(), 0.0, 1.0);
  }
  return {GrayImage(std::move(z)), std::move(gt),
          make_marker_input(detail::interior_markers(target), size, size, std::nullopt),
          std::move(distractor)};
}

// ------------------------------------------------------------------ sweep

struct SweepGrid {
  std::vector<double> lambda_values;
  std::vector<double> theta_values;

  void validate() const {
    if (lambda_values.empty() || theta_values.empty()) throw InputError("sweep grid is empty");
    for (auto const* axis : {&lambda_values, &theta_values}) {
      for (double v : *axis) {
        if (!(v > 0.0)) throw InputError("sweep grid values must be positive");
      }
    }
  }
};

/// 1..10 then every fifth value from 15 to 50, on both axes.
inline SweepGrid default_grid() {
  std::vector<double> v;
  for (int i = 1; i <= 10; ++i) v.push_back(i);
  for (int i = 15; i <= 50; i += 5) v.push_back(i);
  return {v, v};
}

struct SweepCell {
  double lambda = 0.0;
  double theta = 0.0;
  double tc = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string error;
};

struct HeatmapReport {
  SweepGrid grid;
  std::vector<SweepCell> cells;  // lambda-major: cells[i * |theta| + j]
  SweepCell best;

  SweepCell const& at(std::size_t i, std::size_t j) const {
    return cells[i * grid.theta_values.size() + j];
  }
  double fraction_at_least(double tc) const {
    auto const hits = std::count_if(cells.begin(), cells.end(),
                                    [&](SweepCell const& c) { return c.tc >= tc; });
    return static_cast<double>(hits) / static_cast<double>(cells.size());
  }
};

/// Highest TC; ties go to the smallest (lambda, theta) pair.
inline SweepCell best_cell(std::vector<SweepCell> const& cells) {
  if (cells.empty()) throw InputError("no cells");
  SweepCell best = cells.front();
  for (SweepCell const& c : cells) {
    bool const better = c.tc > best.tc ||
                        (c.tc == best.tc && std::pair(c.lambda, c.theta) <
                                                std::pair(best.lambda, best.theta));
    if (better) best = c;
  }
  return best;
}

/// Segments once per (lambda, theta) cell with every other setting taken
/// from `base`. A cell whose run throws scores TC 0 and records the message.
inline HeatmapReport sweep(GrayImage const& z, MarkerInput const& input, FittingSpec const& spec,
                           SweepGrid const& grid, BinaryMask const& gt,
                           SolverConfig const& base = {}, GeodesicParams const& geo = {}) {
  grid.validate();
  input.validate(z.width(), z.height());
  require_same_shape(z.field(), gt, "sweep");
  DistanceField const distance = geodesic_distance(z, input, geo);
  // Non-iterative models see only lambda and the combined field, so cells in
  // one lambda row whose fields coincide bit for bit share a run.
  std::optional<ScalarField> fitting;
  if (!is_iterative(spec.model)) {
    try {
      fitting = fitting_field(z, initial_constants(z, input.region, spec), spec);
    } catch (std::exception const&) {
      fitting.reset();
    }
  }
  BinaryMask const* hard = input.hard_background ? &*input.hard_background : nullptr;
  HeatmapReport report{grid, {}, {}};
  for (double lambda : grid.lambda_values) {
    std::vector<std::pair<ScalarField, SweepCell>> seen;
    for (double theta : grid.theta_values) {
      SweepCell cell;
      cell.lambda = lambda;
      cell.theta = theta;
      std::optional<ScalarField> field;
      if (fitting) field = combine(*fitting, distance, theta, hard).values;
      auto const same = std::find_if(seen.begin(), seen.end(),
                                     [&](auto const& s) { return field && s.first == *field; });
      if (same != seen.end()) {
        cell.tc = same->second.tc;
        cell.iterations = same->second.iterations;
        cell.converged = same->second.converged;
        report.cells.push_back(std::move(cell));
        continue;
      }
      SolverConfig cfg = base;
      cfg.lambda_tilde = lambda;
      cfg.theta = theta;
      cfg.alpha.reset();
      try {
        SegmentationResult const r = segment(z, input, spec, cfg, distance);
        cell.tc = tanimoto(r.mask, gt).tc;
        cell.iterations = r.iterations;
        cell.converged = r.converged;
      } catch (std::exception const& e) {
        cell.error = e.what();
      }
      if (field && cell.error.empty()) seen.emplace_back(std::move(*field), cell);
      report.cells.push_back(std::move(cell));
    }
  }
  report.best = best_cell(report.cells);
  return report;
}

// ------------------------------------------------------------- robustness

using MarkerTriple = std::array<Point, 3>;

/// Three distinct ground-truth pixels per trial, drawn uniformly without
/// replacement.
inline std::vector<MarkerTriple> randomize_markers(BinaryMask const& gt, int count,
                                                   std::uint64_t seed) {
  if (count < 1) throw InputError("trial count must be >= 1");
  std::vector<Point> pool;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (gt(x, y)) pool.push_back({x, y});
    }
  }
  if (pool.size() < 3) throw InputError("ground truth has fewer than 3 pixels");
  Rng rng(seed);
  std::vector<MarkerTriple> out;
  out.reserve(count);
  for (int t = 0; t < count; ++t) {
    std::array<std::size_t, 3> idx{};
    for (int k = 0; k < 3; ++k) {
      std::size_t candidate;
      do {
        candidate = rng.uniform_index(pool.size());
      } while (std::find(idx.begin(), idx.begin() + k, candidate) != idx.begin() + k);
      idx[k] = candidate;
    }
    out.push_back({pool[idx[0]], pool[idx[1]], pool[idx[2]]});
  }
  return out;
}

/// Linear-interpolation quantile (type 7) of sorted data.
inline double quantile_sorted(std::vector<double> const& sorted, double p) {
  if (sorted.empty()) throw InputError("quantile of empty data");
  double const h = (static_cast<double>(sorted.size()) - 1.0) * p;
  auto const lo = static_cast<std::size_t>(std::floor(h));
  std::size_t const hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Box-plot statistics; whiskers are the extreme values inside the Tukey
/// fences [q1 - 1.5 IQR, q3 + 1.5 IQR].
struct BoxSummary {
  double min = 0.0;  // smallest non-outlier
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;  // largest non-outlier
  double mean = 0.0;
  double lower_fence = 0.0;
  double upper_fence = 0.0;
  std::size_t outliers = 0;
};

inline BoxSummary box_summary(std::vector<double> values) {
  if (values.empty()) throw InputError("box summary of empty data");
  std::sort(values.begin(), values.end());
  BoxSummary s;
  s.q1 = quantile_sorted(values, 0.25);
  s.median = quantile_sorted(values, 0.5);
  s.q3 = quantile_sorted(values, 0.75);
  double const iqr = s.q3 - s.q1;
  s.lower_fence = s.q1 - 1.5 * iqr;
  s.upper_fence = s.q3 + 1.5 * iqr;
  bool first = true;
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    if (v < s.lower_fence || v > s.upper_fence) {
      ++s.outliers;
      continue;
    }
    if (first) s.min = v;
    s.max = v;
    first = false;
  }
  s.mean = sum / static_cast<double>(values.size());
  return s;
}

struct Trial {
  MarkerTriple markers;
  double tc = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct RobustnessReport {
  std::vector<Trial> trials;
  BoxSummary summary;
  std::string outlier_rule = "tukey-1.5iqr";
};

inline RobustnessReport robustness_study(GrayImage const& z, BinaryMask const& gt,
                                         FittingSpec const& spec, SolverConfig const& config,
                                         int trials, std::uint64_t seed,
                                         GeodesicParams const& geo = {}) {
  require_same_shape(z.field(), gt, "robustness_study");
  RobustnessReport report;
  std::vector<double> tcs;
  for (MarkerTriple const& m : randomize_markers(gt, trials, seed)) {
    MarkerInput const input =
        make_marker_input({m.begin(), m.end()}, z.width(), z.height(), std::nullopt);
    SegmentationResult const r = segment(z, input, spec, config, geo);
    Trial t{m, tanimoto(r.mask, gt).tc, r.iterations, r.converged};
    tcs.push_back(t.tc);
    report.trials.push_back(t);
  }
  report.summary = box_summary(std::move(tcs));
  return report;
}

// ---------------------------------------------------------------- reports

namespace detail {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace detail

inline std::string sweep_csv(HeatmapReport const& report) {
  std::string out = "lambda,theta,tc,iterations,converged,error\n";
  for (SweepCell const& c : report.cells) {
    std::string err = c.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += detail::format_number(c.lambda) + "," + detail::format_number(c.theta) + "," +
           detail::format_number(c.tc) + "," + std::to_string(c.iterations) + "," +
           (c.converged ? "1" : "0") + "," + err + "\n";
  }
  return out;
}

inline nlohmann::json sweep_json(HeatmapReport const& report) {
  nlohmann::json matrix = nlohmann::json::array();
  for (std::size_t i = 0; i < report.grid.lambda_values.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < report.grid.theta_values.size(); ++j) {
      row.push_back(report.at(i, j).tc);
    }
    matrix.push_back(std::move(row));
  }
  return {
      {"lambda_values", report.grid.lambda_values},
      {"theta_values", report.grid.theta_values},
      {"tc_matrix", std::move(matrix)},
      {"best", {{"lambda", report.best.lambda}, {"theta", report.best.theta},
                {"tc", report.best.tc}}},
      {"fraction_tc_ge_0.9", report.fraction_at_least(0.9)},
  };
}

/// Heatmap raster: lambda increases down the rows, theta across the
/// columns, each cell a cell_px square coloured by tc_color.
inline std::vector<std::uint8_t> heatmap_rgb(HeatmapReport const& report, int cell_px,
                                             int& width, int& height) {
  if (cell_px < 1) throw InputError("cell size must be >= 1");
  std::size_t const rows = report.grid.lambda_values.size();
  std::size_t const cols = report.grid.theta_values.size();
  width = static_cast<int>(cols) * cell_px;
  height = static_cast<int>(rows) * cell_px;
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(width) * height * 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      Rgb const c = tc_color(std::clamp(report.at(y / cell_px, x / cell_px).tc, 0.0, 1.0));
      std::size_t const o = (static_cast<std::size_t>(y) * width + x) * 3;
      rgb[o] = c.r;
      rgb[o + 1] = c.g;
      rgb[o + 2] = c.b;
    }
  }
  return rgb;
}

inline void save_heatmap_png(HeatmapReport const& report, std::string const& path,
                             int cell_px = 16) {
  int w = 0, h = 0;
  auto const rgb = heatmap_rgb(report, cell_px, w, h);
  save_rgb_png(w, h, rgb, path);
}

inline std::string robustness_csv(RobustnessReport const& report) {
  std::string out = "trial,x1,y1,x2,y2,x3,y3,tc,iterations,converged\n";
  for (std::size_t i = 0; i < report.trials.size(); ++i) {
    Trial const& t = report.trials[i];
    out += std::to_string(i);
    for (Point const& p : t.markers) {
      out += "," + std::to_string(p.x) + "," + std::to_string(p.y);
    }
    out += "," + detail::format_number(t.tc) + "," + std::to_string(t.iterations) + "," +
           (t.converged ? "1" : "0") + "\n";
  }
  return out;
}

inline nlohmann::json robustness_json(RobustnessReport const& report) {
  BoxSummary const& s = report.summary;
  return {
      {"trials", report.trials.size()},
      {"outlier_rule", report.outlier_rule},
      {"summary",
       {{"min", s.min}, {"q1", s.q1}, {"median", s.median}, {"q3", s.q3}, {"max", s.max},
        {"mean", s.mean}, {"lower_fence", s.lower_fence}, {"upper_fence", s.upper_fence},
        {"outliers", s.outliers}}},
  };
}

}  // namespace selseg

#endif  // SELSEG_HARNESS_HPP_

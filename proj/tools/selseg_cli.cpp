// selseg: command-line front end.
//
// Exit codes: 0 success, 2 bad arguments, 3 I/O failure, 4 no convergence
// under --strict.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "selseg/selseg.hpp"
#include "selseg/service.hpp"

namespace {

using namespace selseg;

constexpr int kBadArgs = 2;
constexpr int kIoFailure = 3;
constexpr int kNotConverged = 4;

struct Options {
  std::string image, markers, gt, out, fixture;
  int size = 128;
  std::string model = "pm";
  double lambda = SolverConfig{}.lambda_tilde;
  double theta = SolverConfig{}.theta;
  std::optional<double> gamma1, gamma2, c1, c2;
  double beta1 = 1.0, beta2 = 1.0;
  double sigma = 3.0;
  int window = 15;
  double tau = SolverConfig{}.tau;
  double tol = SolverConfig{}.tolerance;
  int max_iters = SolverConfig{}.max_iters;
  std::uint64_t seed = 1;
  int trials = 100;
  bool strict = false;
  bool optimal_constants = false;
  int port = 0;
};

void add_model_options(CLI::App* app, Options& o) {
  app->add_option("--model", o.model, "cv|rsf|lcv|hyb|gav|pm")->capture_default_str();
  app->add_option("--lambda", o.lambda, "fitting weight")->capture_default_str();
  app->add_option("--theta", o.theta, "distance weight")->capture_default_str();
  app->add_option("--gamma1", o.gamma1, "PM lower tent width (default: Otsu)");
  app->add_option("--gamma2", o.gamma2, "PM upper tent width (default: Otsu)");
  app->add_option("--beta1", o.beta1, "GAV foreground exponent")->capture_default_str();
  app->add_option("--beta2", o.beta2, "GAV background exponent")->capture_default_str();
  app->add_option("--sigma", o.sigma, "RSF kernel scale")->capture_default_str();
  app->add_option("--window", o.window, "LCV/HYB box window (odd)")->capture_default_str();
  app->add_option("--c1", o.c1, "fixed foreground constant (CV, PM)");
  app->add_option("--c2", o.c2, "fixed background constant (CV)");
  app->add_option("--tau", o.tau, "time step")->capture_default_str();
  app->add_option("--tol", o.tol, "stopping tolerance")->capture_default_str();
  app->add_option("--max-iters", o.max_iters, "iteration cap")->capture_default_str();
}

FittingSpec fitting_spec(Options const& o) {
  FittingSpec s;
  s.model = parse_model(o.model);
  s.pm_gamma1 = o.gamma1;
  s.pm_gamma2 = o.gamma2;
  s.gav_beta1 = o.beta1;
  s.gav_beta2 = o.beta2;
  s.rsf_sigma = o.sigma;
  s.lcv_window = o.window;
  s.c1 = o.c1;
  s.c2 = o.c2;
  s.validate();
  return s;
}

SolverConfig solver_config(Options const& o) {
  SolverConfig c;
  c.lambda_tilde = o.lambda;
  c.theta = o.theta;
  c.tau = o.tau;
  c.tolerance = o.tol;
  c.max_iters = o.max_iters;
  c.validate();
  return c;
}

MarkerInput read_markers(std::string const& path, int w, int h) {
  auto const bytes = detail::read_file(path);
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (json::exception const&) {
    throw InputError("marker file '" + path + "' is not valid JSON");
  }
  MarkerFile const m = marker_file_from_json(j);
  if (m.markers.empty()) throw InputError("marker file has no markers");
  std::optional<BinaryMask> hard;
  if (!m.hard_background.empty()) hard = points_to_mask(m.hard_background, w, h);
  return make_marker_input(m.markers, w, h, hard);
}

struct Scene {
  GrayImage image;
  std::optional<MarkerInput> input;
  std::optional<BinaryMask> gt;
};

// Either a named fixture or files given by --image/--markers/--gt.
Scene load_scene(Options const& o, bool need_markers, bool need_gt) {
  Scene s;
  if (!o.fixture.empty()) {
    Fixture f = make_fixture(o.fixture, o.size, o.seed);
    s.image = std::move(f.image);
    s.input = std::move(f.input);
    s.gt = std::move(f.gt);
    return s;
  }
  if (o.image.empty()) throw InputError("--image or --fixture is required");
  s.image = load_image(o.image);
  if (!o.markers.empty()) s.input = read_markers(o.markers, s.image.width(), s.image.height());
  if (!o.gt.empty()) s.gt = load_mask(o.gt);
  if (need_markers && !s.input) throw InputError("--markers is required");
  if (need_gt && !s.gt) throw InputError("--gt is required");
  return s;
}

void apply_optimal_constants(Options const& o, Scene const& s, FittingSpec& spec) {
  if (!o.optimal_constants) return;
  spec.c1 = masked_mean(s.image.field(), *s.gt, 1);
  spec.c2 = masked_mean(s.image.field(), *s.gt, 0);
}

void write_text(std::string const& path, std::string const& text) {
  detail::write_file(path, std::span(reinterpret_cast<std::uint8_t const*>(text.data()),
                                     text.size()));
}

int run_segment(Options const& o) {
  if (o.markers.empty()) throw InputError("--markers is required");
  FittingSpec spec = fitting_spec(o);
  SolverConfig const config = solver_config(o);
  Scene const s = load_scene(o, true, false);
  if (o.optimal_constants) {
    if (!s.gt) throw InputError("--optimal-constants needs --gt");
    apply_optimal_constants(o, s, spec);
  }
  SegmentationResult const r = segment(s.image, *s.input, spec, config);
  if (!o.out.empty()) save_mask(r.mask, o.out);
  std::cout << "iterations=" << r.iterations << " converged=" << (r.converged ? "true" : "false")
            << "\n";
  if (s.gt) {
    char tc[32];
    std::snprintf(tc, sizeof tc, "%.4f", tanimoto(r.mask, *s.gt).tc);
    std::cout << "TC=" << tc << "\n";
  }
  if (o.strict && !r.converged) return kNotConverged;
  return 0;
}

int run_sweep(Options const& o) {
  if (o.out.empty()) throw InputError("--out is required");
  FittingSpec spec = fitting_spec(o);
  SolverConfig const config = solver_config(o);
  Scene const s = load_scene(o, true, true);
  apply_optimal_constants(o, s, spec);
  HeatmapReport const report = sweep(s.image, *s.input, spec, default_grid(), *s.gt, config);
  write_text(o.out + ".csv", sweep_csv(report));
  write_text(o.out + ".json", sweep_json(report).dump(2) + "\n");
  save_heatmap_png(report, o.out + ".png");
  std::cout << "cells=" << report.cells.size() << " best_lambda=" << report.best.lambda
            << " best_theta=" << report.best.theta << " best_tc=" << report.best.tc
            << " fraction_tc_ge_0.9=" << report.fraction_at_least(0.9) << "\n";
  return 0;
}

int run_robustness(Options const& o) {
  if (o.out.empty()) throw InputError("--out is required");
  if (o.trials < 1) throw InputError("--trials must be >= 1");
  FittingSpec spec = fitting_spec(o);
  SolverConfig const config = solver_config(o);
  Scene const s = load_scene(o, false, true);
  apply_optimal_constants(o, s, spec);
  RobustnessReport const report = robustness_study(s.image, *s.gt, spec, config, o.trials, o.seed);
  write_text(o.out + ".csv", robustness_csv(report));
  write_text(o.out + ".json", robustness_json(report).dump(2) + "\n");
  BoxSummary const& b = report.summary;
  std::cout << "trials=" << report.trials.size() << " median=" << b.median << " min=" << b.min
            << " outliers=" << b.outliers << "\n";
  return 0;
}

int run_fixture(Options const& o) {
  if (o.out.empty()) throw InputError("--out is required");
  Fixture const f = make_fixture(o.fixture, o.size, o.seed);
  std::filesystem::create_directories(o.out);
  std::string const dir = o.out + "/";
  save_image(f.image, dir + "image.pgm");
  save_mask(f.gt, dir + "gt.pgm");
  write_text(dir + "markers.json", to_json(MarkerFile{f.input.markers, {}}).dump() + "\n");
  std::cout << "wrote " << dir << "{image.pgm,gt.pgm,markers.json}\n";
  return 0;
}

int run_serve(Options const& o) {
  int port = o.port;
  if (port == 0) {
    char const* env = std::getenv("SELSEG_PORT");
    port = env ? std::atoi(env) : 8080;
  }
  if (port <= 0 || port > 65535) throw InputError("port out of range");
  SegmentationService service;
  httplib::Server server;
  install_routes(server, service);
  std::cout << "listening on 127.0.0.1:" << port << std::endl;
  if (!server.listen("127.0.0.1", port)) throw IoError("cannot bind port " + std::to_string(port));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Selective image segmentation"};
  app.require_subcommand(1);

  auto* seg = app.add_subcommand("segment", "segment one image");
  seg->add_option("--image", o.image, "input image (PNG/PGM/PPM)")->required();
  seg->add_option("--markers", o.markers, "marker JSON file")->required();
  seg->add_option("--gt", o.gt, "ground-truth mask; prints TC");
  seg->add_option("--out", o.out, "output mask (.png or .pgm)");
  seg->add_flag("--strict", o.strict, "exit 4 when the solver does not converge");
  seg->add_flag("--optimal-constants", o.optimal_constants, "CV constants from the ground truth");
  add_model_options(seg, o);

  auto* sw = app.add_subcommand("sweep", "(lambda, theta) heatmap sweep");
  auto* rob = app.add_subcommand("robustness", "random three-marker study");
  for (auto* sub : {sw, rob}) {
    sub->add_option("--fixture", o.fixture, "synthetic scene instead of files");
    sub->add_option("--size", o.size, "fixture size")->capture_default_str();
    sub->add_option("--image", o.image, "input image");
    sub->add_option("--gt", o.gt, "ground-truth mask");
    sub->add_option("--out", o.out, "output prefix (.csv/.json[/.png])")->required();
    sub->add_option("--seed", o.seed, "random seed")->capture_default_str();
    sub->add_flag("--optimal-constants", o.optimal_constants,
                  "CV constants from the ground truth");
    add_model_options(sub, o);
  }
  sw->add_option("--markers", o.markers, "marker JSON file");
  rob->add_option("--trials", o.trials, "number of marker triples")->capture_default_str();

  auto* fx = app.add_subcommand("fixture", "write a synthetic scene");
  fx->add_option("--name", o.fixture, "disc|two-equal|contrast|noisy-two-equal")->required();
  fx->add_option("--size", o.size, "side length")->capture_default_str();
  fx->add_option("--seed", o.seed, "noise seed")->capture_default_str();
  fx->add_option("--out", o.out, "output directory")->required();

  auto* srv = app.add_subcommand("serve", "run the HTTP service");
  srv->add_option("--port", o.port, "port (default $SELSEG_PORT or 8080)");

  try {
    app.parse(argc, argv);
  } catch (CLI::Success const& e) {
    return app.exit(e);
  } catch (CLI::ParseError const& e) {
    app.exit(e);
    return kBadArgs;
  }

  try {
    if (*seg) return run_segment(o);
    if (*sw) return run_sweep(o);
    if (*rob) return run_robustness(o);
    if (*fx) return run_fixture(o);
    if (*srv) return run_serve(o);
  } catch (InputError const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadArgs;
  } catch (IoError const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (std::filesystem::filesystem_error const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoFailure;
  }
  return kBadArgs;
}

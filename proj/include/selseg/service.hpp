#ifndef SELSEG_SERVICE_HPP_
#define SELSEG_SERVICE_HPP_

// Session-based HTTP front end for interactive segmentation.
//
//   POST   /session               body: PNG or binary PGM/PPM bytes
//                                 -> {"id", "width", "height"}
//   POST   /session/{id}/gt       body: mask image bytes (> half scale is 1)
//   POST   /session/{id}/segment  body: {"markers": [[x, y], ...],
//                                        "hard_background": [[x, y], ...],
//                                        "fitting": {...}, "solver": {...},
//                                        "request_id": any}
//   GET    /session/{id}/image    normalised grayscale PNG
//   DELETE /session/{id}
//
// Segment responses echo the markers and carry the mask as row-major run
// lengths (alternating 0/1 runs, zeros first), the boundary polylines, the
// iteration count and, once a ground truth is uploaded, its TC. 404 marks an
// unknown session, 400 bad input, 422 a run that hit max_iters (body still
// included).

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "selseg/contour.hpp"
#include "selseg/geodesic.hpp"
#include "selseg/image_io.hpp"
#include "selseg/metrics.hpp"
#include "selseg/serialization.hpp"
#include "selseg/solver.hpp"

namespace selseg {

struct ApiResponse {
  int status = 200;
  json body;
};

class SegmentationService {
 public:
  struct Session {
    std::mutex mutex;
    GrayImage image;
    std::optional<BinaryMask> gt;
    ScalarField speed;  // geodesic speed, fixed per image
    std::vector<Point> cached_markers;
    std::optional<DistanceField> cached_distance;
    std::uint64_t distance_computations = 0;
  };

  explicit SegmentationService(GeodesicParams geo = {}) : geo_(geo) {}

  ApiResponse create_session(std::span<std::uint8_t const> bytes) {
    GrayImage image;
    try {
      image = decode_image(bytes);
    } catch (IoError const& e) {
      return error(400, e.what());
    }
    auto session = std::make_shared<Session>();
    session->speed = edge_speed(image, geo_.eps_d, geo_.beta_g);
    session->image = std::move(image);
    std::lock_guard lock(mutex_);
    std::string const id = "s" + std::to_string(++next_id_);
    json body = {{"id", id}, {"width", session->image.width()},
                 {"height", session->image.height()}};
    sessions_[id] = std::move(session);
    return {200, std::move(body)};
  }

  ApiResponse upload_gt(std::string const& id, std::span<std::uint8_t const> bytes) {
    auto session = find(id);
    if (!session) return error(404, "unknown session");
    BinaryMask gt;
    try {
      gt = decode_mask(bytes);
    } catch (IoError const& e) {
      return error(400, e.what());
    }
    std::lock_guard lock(session->mutex);
    if (!gt.same_shape(session->image.field())) return error(400, "mask size differs from image");
    std::size_t const ones = count_ones(gt);
    session->gt = std::move(gt);
    return {200, {{"id", id}, {"gt_pixels", ones}}};
  }

  ApiResponse segment_request(std::string const& id, std::string const& payload) {
    auto session = find(id);
    if (!session) return error(404, "unknown session");
    json request;
    try {
      request = json::parse(payload);
    } catch (json::exception const&) {
      return error(400, "body is not valid JSON");
    }
    std::lock_guard lock(session->mutex);
    try {
      return run_segment(*session, request);
    } catch (InputError const& e) {
      return error(400, e.what());
    }
  }

  std::optional<std::vector<std::uint8_t>> image_png(std::string const& id) {
    auto session = find(id);
    if (!session) return std::nullopt;
    std::lock_guard lock(session->mutex);
    return selseg::image_png(session->image);
  }

  bool remove(std::string const& id) {
    std::lock_guard lock(mutex_);
    return sessions_.erase(id) > 0;
  }

  std::shared_ptr<Session> find(std::string const& id) {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

 private:
  static ApiResponse error(int status, std::string const& message) {
    return {status, {{"error", message}}};
  }

  ApiResponse run_segment(Session& s, json const& request) {
    if (!request.is_object()) throw InputError("request must be a JSON object");
    detail::reject_unknown_keys(
        request, {"markers", "hard_background", "fitting", "solver", "request_id"}, "segment");
    if (!request.contains("markers")) throw InputError("missing 'markers'");
    std::vector<Point> markers = points_from_json(request.at("markers"));
    if (markers.empty()) throw InputError("at least one marker is required");
    int const w = s.image.width(), h = s.image.height();
    std::optional<BinaryMask> hard;
    if (request.contains("hard_background")) {
      auto const pts = points_from_json(request.at("hard_background"));
      if (!pts.empty()) hard = points_to_mask(pts, w, h);
    }
    FittingSpec const spec =
        request.contains("fitting") ? fitting_spec_from_json(request.at("fitting")) : FittingSpec{};
    SolverConfig const config =
        request.contains("solver") ? solver_config_from_json(request.at("solver")) : SolverConfig{};
    MarkerInput const input = make_marker_input(markers, w, h, hard);
    input.validate(w, h);

    if (!s.cached_distance || s.cached_markers != markers) {
      s.cached_distance = geodesic_distance(s.speed, input, geo_);
      s.cached_markers = markers;
      ++s.distance_computations;
    }
    SegmentationResult const r = segment(s.image, input, spec, config, *s.cached_distance);

    json contours = json::array();
    for (Polyline const& line : marching_squares(r.mask)) {
      json pts = json::array();
      for (Vec2 const& p : line) pts.push_back({p.x, p.y});
      contours.push_back(std::move(pts));
    }
    json constants = {{"c1", r.constants.c1}};
    if (r.constants.c2) constants["c2"] = *r.constants.c2;
    if (r.constants.d1) constants["d1"] = *r.constants.d1;
    if (r.constants.d2) constants["d2"] = *r.constants.d2;
    if (r.constants.gammas) {
      constants["gamma1"] = r.constants.gammas->gamma1;
      constants["gamma2"] = r.constants.gammas->gamma2;
    }
    json body = {
        {"request_id", request.value("request_id", json(nullptr))},
        {"markers", points_to_json(markers)},
        {"width", w},
        {"height", h},
        {"mask", {{"encoding", "rle"}, {"order", "row-major"}, {"counts", encode_rle(r.mask)}}},
        {"contours", std::move(contours)},
        {"iterations", r.iterations},
        {"converged", r.converged},
        {"constants", std::move(constants)},
    };
    if (s.gt) body["tc"] = tanimoto(r.mask, *s.gt).tc;
    return {r.converged ? 200 : 422, std::move(body)};
  }

  GeodesicParams geo_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 0;
};

/// Binds the service's routes onto an httplib server.
inline void install_routes(httplib::Server& server, SegmentationService& service) {
  auto bytes_of = [](httplib::Request const& req) {
    return std::span<std::uint8_t const>(reinterpret_cast<std::uint8_t const*>(req.body.data()),
                                         req.body.size());
  };
  auto reply = [](httplib::Response& res, ApiResponse const& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
  server.Options(R"(/.*)", [](httplib::Request const&, httplib::Response& res) {
    res.status = 204;
  });
  server.Post("/session", [&, bytes_of, reply](httplib::Request const& req,
                                               httplib::Response& res) {
    reply(res, service.create_session(bytes_of(req)));
  });
  server.Post(R"(/session/([^/]+)/gt)", [&, bytes_of, reply](httplib::Request const& req,
                                                              httplib::Response& res) {
    reply(res, service.upload_gt(req.matches[1], bytes_of(req)));
  });
  server.Post(R"(/session/([^/]+)/segment)", [&, reply](httplib::Request const& req,
                                                         httplib::Response& res) {
    reply(res, service.segment_request(req.matches[1], req.body));
  });
  server.Get(R"(/session/([^/]+)/image)", [&](httplib::Request const& req,
                                               httplib::Response& res) {
    auto png = service.image_png(req.matches[1]);
    if (!png) {
      res.status = 404;
      res.set_content(json{{"error", "unknown session"}}.dump(), "application/json");
      return;
    }
    res.set_content(std::string(png->begin(), png->end()), "image/png");
  });
  server.Delete(R"(/session/([^/]+))", [&](httplib::Request const& req, httplib::Response& res) {
    if (service.remove(req.matches[1])) {
      res.status = 204;
    } else {
      res.status = 404;
      res.set_content(json{{"error", "unknown session"}}.dump(), "application/json");
    }
  });
}

}  // namespace selseg

#endif  // SELSEG_SERVICE_HPP_

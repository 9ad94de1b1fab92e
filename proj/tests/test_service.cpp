#include <gtest/gtest.h>

#include <thread>

#include "selseg/harness.hpp"
#include "selseg/service.hpp"

using namespace selseg;

namespace {

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    install_routes(server_, service_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(120, 0);
  }

  void TearDown() override {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string upload(GrayImage const& z) {
    auto const png = image_png(z);
    auto res = client_->Post("/session", std::string(png.begin(), png.end()), "image/png");
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    return json::parse(res->body)["id"].get<std::string>();
  }

  httplib::Result segment(std::string const& id, json const& body) {
    return client_->Post("/session/" + id + "/segment", body.dump(), "application/json");
  }

  static BinaryMask decode_body_mask(json const& body) {
    EXPECT_EQ(body["mask"]["encoding"], "rle");
    return decode_rle(body["width"].get<int>(), body["height"].get<int>(),
                      body["mask"]["counts"].get<std::vector<std::uint32_t>>());
  }

  SegmentationService service_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::unique_ptr<httplib::Client> client_;
};

}  // namespace

TEST_F(ServiceTest, DiscRoundTripWithGroundTruth) {
  Fixture const fx = make_fixture("disc", 64);
  std::string const id = upload(fx.image);
  auto const gt = mask_png(fx.gt);
  auto g = client_->Post("/session/" + id + "/gt", std::string(gt.begin(), gt.end()),
                         "image/png");
  ASSERT_TRUE(g);
  EXPECT_EQ(g->status, 200);
  json const req = {{"markers", points_to_json(fx.input.markers)}, {"request_id", 7}};
  auto res = segment(id, req);
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  json const body = json::parse(res->body);
  EXPECT_EQ(body["request_id"], 7);
  EXPECT_EQ(points_from_json(body["markers"]), fx.input.markers);
  BinaryMask const mask = decode_body_mask(body);
  EXPECT_GE(tanimoto(mask, fx.gt).tc, 0.99);
  EXPECT_NEAR(body["tc"].get<double>(), tanimoto(mask, fx.gt).tc, 1e-15);
  EXPECT_TRUE(body["converged"].get<bool>());
  EXPECT_FALSE(body["contours"].empty());
  EXPECT_TRUE(body["constants"].contains("gamma1"));
}

TEST_F(ServiceTest, ImageEndpointReturnsNormalisedPng) {
  Fixture const fx = make_fixture("contrast", 32);
  std::string const id = upload(fx.image);
  auto res = client_->Get("/session/" + id + "/image");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "image/png");
  GrayImage const back = decode_image(std::span<std::uint8_t const>(
      reinterpret_cast<std::uint8_t const*>(res->body.data()), res->body.size()));
  EXPECT_EQ(back.width(), 32);
  EXPECT_EQ(back.height(), 32);
  EXPECT_EQ(back.field(), GrayImage::normalized(fx.image.field()).field());
}

TEST_F(ServiceTest, ErrorStatuses) {
  Fixture const fx = make_fixture("disc", 32);
  std::string const id = upload(fx.image);
  EXPECT_EQ(segment("nope", {{"markers", {{1, 1}}}})->status, 404);
  EXPECT_EQ(client_->Get("/session/nope/image")->status, 404);
  EXPECT_EQ(client_->Post("/session/nope/gt", "x", "text/plain")->status, 404);
  EXPECT_EQ(client_->Delete("/session/nope")->status, 404);
  EXPECT_EQ(segment(id, {{"markers", json::array()}})->status, 400);
  EXPECT_EQ(segment(id, {{"markers", {{100, 1}}}})->status, 400);
  EXPECT_EQ(segment(id, {{"markers", {{1, 1}}}, {"bogus", 1}})->status, 400);
  EXPECT_EQ(segment(id, {{"markers", "abc"}})->status, 400);
  EXPECT_EQ(client_->Post("/session/" + id + "/segment", "{not json", "application/json")->status,
            400);
  EXPECT_EQ(client_->Post("/session", "garbage", "image/png")->status, 400);
  EXPECT_EQ(client_->Post("/session/" + id + "/gt", "garbage", "image/png")->status, 400);
  auto const small = mask_png(BinaryMask(8, 8));
  EXPECT_EQ(client_->Post("/session/" + id + "/gt", std::string(small.begin(), small.end()),
                          "image/png")
                ->status,
            400);
  json const overlap = {{"markers", {{16, 16}}}, {"hard_background", {{16, 16}}}};
  EXPECT_EQ(segment(id, overlap)->status, 400);
}

TEST_F(ServiceTest, NonConvergenceIsUnprocessableButCarriesTheResult) {
  Fixture const fx = make_fixture("disc", 32);
  std::string const id = upload(fx.image);
  json const req = {{"markers", points_to_json(fx.input.markers)},
                    {"solver", {{"max_iters", 2}}}};
  auto res = segment(id, req);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 422);
  json const body = json::parse(res->body);
  EXPECT_FALSE(body["converged"].get<bool>());
  EXPECT_EQ(body["iterations"], 2);
  EXPECT_EQ(decode_body_mask(body).size(), 32u * 32u);
}

TEST_F(ServiceTest, RepeatedRequestsAreByteIdenticalAndCacheIsExact) {
  Fixture const fx = make_fixture("two-equal", 48);
  std::string const id = upload(fx.image);
  json const req = {{"markers", points_to_json(fx.input.markers)},
                    {"solver", {{"lambda_tilde", 3}, {"theta", 6}}}};
  std::string const first = segment(id, req)->body;
  std::string const second = segment(id, req)->body;
  EXPECT_EQ(first, second);
  auto session = service_.find(id);
  ASSERT_TRUE(session);
  EXPECT_EQ(session->distance_computations, 1u);

  json other = req;
  other["markers"] = {{10, 22}, {13, 25}, {11, 27}};
  segment(id, other);
  EXPECT_EQ(session->distance_computations, 2u);
  std::string const warm = segment(id, other)->body;
  EXPECT_EQ(session->distance_computations, 2u);

  std::string const fresh = upload(fx.image);
  EXPECT_EQ(segment(fresh, other)->body, warm);
  EXPECT_EQ(segment(fresh, req)->body, first);
}

TEST_F(ServiceTest, BackgroundScribbleRemovesDistractor) {
  Fixture const fx = make_fixture("two-equal", 48);
  std::string const id = upload(fx.image);
  json const solver = {{"lambda_tilde", 5}, {"theta", 0.5}};
  json req = {{"markers", points_to_json(fx.input.markers)}, {"solver", solver}};
  BinaryMask const before = decode_body_mask(json::parse(segment(id, req)->body));
  std::vector<Point> scribble;
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 48; ++x) {
      if (fx.distractor(x, y)) scribble.push_back({x, y});
    }
  }
  std::size_t covered = 0;
  for (Point const& p : scribble) covered += before(p.x, p.y);
  EXPECT_GT(covered, 0u) << "distractor should be segmented without the scribble";
  req["hard_background"] = points_to_json(scribble);
  BinaryMask const after = decode_body_mask(json::parse(segment(id, req)->body));
  for (Point const& p : scribble) EXPECT_EQ(after(p.x, p.y), 0);
  EXPECT_GE(tanimoto(after, fx.gt).tc, 0.99);
}

TEST_F(ServiceTest, PreflightAndDelete) {
  auto opt = client_->Options("/session");
  ASSERT_TRUE(opt);
  EXPECT_EQ(opt->status, 204);
  EXPECT_EQ(opt->get_header_value("Access-Control-Allow-Origin"), "*");
  std::string const id = upload(make_fixture("disc", 32).image);
  EXPECT_EQ(client_->Delete("/session/" + id)->status, 204);
  EXPECT_EQ(client_->Get("/session/" + id + "/image")->status, 404);
  std::string const next = upload(make_fixture("disc", 32).image);
  EXPECT_NE(next, id);
}

TEST(ServiceDirect, SessionsAreIsolated) {
  SegmentationService service;
  auto const a = image_png(make_fixture("disc", 32).image);
  auto const b = image_png(make_fixture("contrast", 40).image);
  std::string const ia = service.create_session(a).body["id"];
  std::string const ib = service.create_session(b).body["id"];
  EXPECT_NE(ia, ib);
  EXPECT_EQ(service.find(ia)->image.width(), 32);
  EXPECT_EQ(service.find(ib)->image.width(), 40);
  EXPECT_TRUE(service.remove(ia));
  EXPECT_FALSE(service.find(ia));
  EXPECT_TRUE(service.find(ib));
}

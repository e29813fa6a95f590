#include <gtest/gtest.h>

#include <thread>

#include "forceforge/server.hpp"

using namespace forceforge;

namespace {

Image decode_strip(const ojson& body) {
  // httplib ships an encoder only; decode with a small table.
  const std::string in = body.at("strip_png").get<std::string>();
  static const std::string chars = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::vector<std::uint8_t> out;
  int val = 0, bits = -8;
  for (char c : in) {
    const auto pos = chars.find(c);
    if (pos == std::string::npos) break;
    val = (val << 6) + static_cast<int>(pos);
    bits += 6;
    if (bits >= 0) {
      out.push_back(static_cast<std::uint8_t>((val >> bits) & 0xFF));
      bits -= 8;
    }
  }
  return decode_png(out);
}

class LiveServer : public ::testing::Test {
 protected:
  void SetUp() override {
    register_routes(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  httplib::Client client() { return httplib::Client("127.0.0.1", port_); }

  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST(ServerHandlers, LocalEncodeArgmaxFollowsDisplacement) {
  const auto r = handle_encode({{"type", "local"}, {"x", 100}, {"y", 200}, {"force", 1.0}, {"angle", 0}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  const auto& argmax = r.body.at("argmax");
  EXPECT_EQ(argmax.front(), ojson({100, 200}));
  EXPECT_EQ(argmax.back(), ojson({460, 200}));
  const auto strip = decode_strip(r.body);
  EXPECT_EQ(strip.width, 180 * kPreviewTiles);
  EXPECT_EQ(strip.height, 120);
}

TEST(ServerHandlers, GlobalEncodeReportsChannels) {
  const auto r = handle_encode({{"type", "global"}, {"force", 0.5}, {"angle", 90}});
  ASSERT_EQ(r.status, 200);
  const auto ch = r.body.at("channels");
  EXPECT_NEAR(ch[0].get<double>(), 0.0, 1e-7);
  EXPECT_NEAR(ch[1].get<double>(), 0.0, 1e-7);
  EXPECT_NEAR(ch[2].get<double>(), 1.0, 1e-7);
}

TEST(ServerHandlers, MultiEncodeShowsTwoBlobs) {
  const auto r = handle_encode({{"type", "multi"},
                                {"tiles", 2},
                                {"forces", {{{"x", 100}, {"y", 100}, {"force", 0}, {"angle", 0}},
                                            {{"x", 500}, {"y", 400}, {"force", 0}, {"angle", 180}}}}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  const auto strip = decode_strip(r.body);
  EXPECT_GT(strip.pixel(25, 25)[0], 200);
  EXPECT_GT(strip.pixel(125, 100)[0], 200);
  EXPECT_LT(strip.pixel(90, 60)[0], 10);
}

TEST(ServerHandlers, ErrorStatuses) {
  EXPECT_EQ(handle_encode({{"type", "local"}, {"x", 900}, {"y", 200}, {"force", 1}, {"angle", 0}}).status, 422);
  EXPECT_EQ(handle_encode({{"type", "local"}, {"x", 10}, {"y", 20}, {"force", 1.5}, {"angle", 0}}).status, 400);
  EXPECT_EQ(handle_encode({{"type", "local"}, {"y", 20}, {"force", 1}, {"angle", 0}}).status, 400);
  EXPECT_EQ(handle_encode({{"type", "local"}, {"x", "left"}, {"y", 20}, {"force", 1}, {"angle", 0}}).status, 400);
  EXPECT_EQ(handle_encode({{"type", "sideways"}}).status, 400);
  EXPECT_EQ(handle_encode({{"type", "multi"}, {"forces", ojson::array()}}).status, 400);
  EXPECT_EQ(handle_simulate({{"scene", "nope"}, {"force", 0.5}, {"angle", 0}}).status, 404);
  EXPECT_EQ(handle_simulate({{"scene", "flag"}, {"force", 2}, {"angle", 0}}).status, 400);
}

TEST(ServerHandlers, SoccerTravelsFartherThanBowling) {
  for (double f : {0.2, 0.8}) {
    const ojson req{{"force", f}, {"angle", 0}, {"tiles", 2}};
    auto soccer = req, bowling = req;
    soccer["scene"] = "ball-soccer";
    bowling["scene"] = "ball-bowling";
    const auto a = handle_simulate(soccer), b = handle_simulate(bowling);
    ASSERT_EQ(a.status, 200) << a.body.dump();
    ASSERT_EQ(b.status, 200);
    EXPECT_GT(a.body.at("distance_px").get<double>(), b.body.at("distance_px").get<double>());
    EXPECT_EQ(a.body.at("trajectory").size(), 49u);
  }
}

TEST(ServerHandlers, SimulateIsDeterministicForEveryScene) {
  for (const auto& s : canned_scenes()) {
    const ojson req{{"scene", s.id}, {"force", 0.7}, {"angle", 30}, {"seed", 4}, {"tiles", 3}};
    const auto a = handle_simulate(req);
    ASSERT_EQ(a.status, 200) << s.id << " " << a.body.dump();
    EXPECT_EQ(a.body.dump(), handle_simulate(req).body.dump()) << s.id;
    EXPECT_GT(a.body.at("distance_px").get<double>(), 0.0) << s.id;
    EXPECT_EQ(decode_strip(a.body).width, 180 * 3);
  }
}

TEST_F(LiveServer, Endpoints) {
  auto cli = client();
  auto health = cli.Get("/healthz");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(health->body, "ok");

  auto scenes = cli.Get("/scenes");
  ASSERT_TRUE(scenes);
  EXPECT_EQ(ojson::parse(scenes->body).at("scenes").size(), canned_scenes().size());

  const ojson enc{{"type", "local"}, {"x", 100}, {"y", 200}, {"force", 1}, {"angle", 0}, {"tiles", 2}};
  auto encoded = cli.Post("/encode", enc.dump(), "application/json");
  ASSERT_TRUE(encoded);
  EXPECT_EQ(encoded->status, 200);
  EXPECT_EQ(ojson::parse(encoded->body).at("argmax").back(), ojson({460, 200}));

  auto bad = cli.Post("/encode", "not json", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  auto offscreen = cli.Post("/encode", ojson{{"type", "local"}, {"x", -5}, {"y", 0}, {"force", 1}, {"angle", 0}}.dump(),
                            "application/json");
  ASSERT_TRUE(offscreen);
  EXPECT_EQ(offscreen->status, 422);

  auto sim = cli.Post("/simulate", ojson{{"scene", "plant"}, {"force", 1}, {"angle", 0}, {"tiles", 2}}.dump(),
                      "application/json");
  ASSERT_TRUE(sim);
  EXPECT_EQ(sim->status, 200);
  EXPECT_EQ(ojson::parse(sim->body).at("trajectory").size(), 49u);
}

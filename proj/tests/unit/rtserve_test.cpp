// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "flakelens/core/image_io.hpp"
#include "flakelens/infer/stub_engine.hpp"
#include "flakelens/rtserve/annotate.hpp"
#include "flakelens/rtserve/fps_meter.hpp"
#include "flakelens/rtserve/frame_source.hpp"
#include "flakelens/rtserve/handoff.hpp"
#include "flakelens/rtserve/live_config.hpp"
#include "flakelens/rtserve/pipeline.hpp"
#include "flakelens/rtserve/server.hpp"

namespace fl = flakelens;
namespace rt = flakelens::rtserve;
namespace fs = std::filesystem;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = boost::asio::ip::tcp;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

std::vector<std::uint8_t> bytes(const fl::core::ImageBuffer& img) {
    const auto d = img.data();
    return {d.begin(), d.end()};
}

fl::core::ClassSet flake_classes() { return fl::core::ClassSet({"thin", "thick", "bulk"}); }

fl::infer::ModelManifest stub_manifest(const std::string& id, const std::string& path) {
    auto m = fl::infer::StubEngine::make_manifest(flake_classes());
    m.id = id;
    m.model_path = path;
    return m;
}

rt::ModelRegistry stub_registry(const std::string& path = "stub:scene") {
    return rt::ModelRegistry::load({stub_manifest("stub", path)});
}

std::unique_ptr<rt::FrameSource> synthetic(double fps, std::uint64_t frames, int w = 320, int h = 240) {
    rt::SyntheticOptions o;
    o.fps = fps;
    o.frames = frames;
    o.width = w;
    o.height = h;
    return std::make_unique<rt::SyntheticSource>(o);
}

/// Records what a sink sees.
struct Recorder : rt::FrameSink {
    std::mutex mutex;
    std::vector<std::uint64_t> ids;
    std::vector<std::uint64_t> versions;
    void on_frame(const rt::PublishedFrame& f) override {
        std::lock_guard lock(mutex);
        ids.push_back(f.frame_id);
        versions.push_back(f.config_version);
    }
};

struct Throwing : rt::FrameSink {
    std::atomic<int> calls{0};
    void on_frame(const rt::PublishedFrame&) override {
        ++calls;
        throw std::runtime_error("sink broke");
    }
};

}  // namespace

TEST(Handoff, LatestSlotReplacesWaitingItem) {
    rt::LatestSlot<int> slot;
    EXPECT_FALSE(slot.put(1));
    EXPECT_TRUE(slot.put(2));
    std::stop_source stop;
    EXPECT_EQ(slot.take(stop.get_token()), 2);
    EXPECT_FALSE(slot.drain().has_value());
    slot.put(3);
    slot.close();
    EXPECT_EQ(slot.take(stop.get_token()), 3);
    EXPECT_FALSE(slot.take(stop.get_token()).has_value());
}

TEST(Handoff, LatestSlotTakeWakesOnStop) {
    rt::LatestSlot<int> slot;
    std::stop_source stop;
    std::thread t([&] {
        std::this_thread::sleep_for(20ms);
        stop.request_stop();
    });
    EXPECT_FALSE(slot.take(stop.get_token()).has_value());
    t.join();
}

TEST(Handoff, BoundedQueueBlocksAtCapacity) {
    rt::BoundedQueue<int> q(2);
    q.push(1);
    q.push(2);
    std::atomic<bool> pushed{false};
    std::thread t([&] {
        q.push(3);
        pushed = true;
    });
    std::this_thread::sleep_for(30ms);
    EXPECT_FALSE(pushed);
    EXPECT_EQ(q.pop(), 1);
    t.join();
    EXPECT_TRUE(pushed);
    EXPECT_EQ(q.size(), 2u);
    q.close();
    EXPECT_EQ(q.pop(), 2);
    EXPECT_EQ(q.pop(), 3);
    EXPECT_FALSE(q.pop().has_value());
}

TEST(FpsMeter, FiftyEvenPublishesInOneSecond) {
    rt::FpsMeter meter;
    const std::int64_t base = 5'000'000'000;
    for (int i = 1; i <= 50; ++i) meter.record(base + i * 20'000'000LL, 5.0);
    const auto s = meter.snapshot(base + 1'000'000'000);
    EXPECT_DOUBLE_EQ(s.fps, 50.0);
    EXPECT_EQ(s.count, 50u);
}

TEST(FpsMeter, IdleWindowIsZero) {
    rt::FpsMeter meter;
    EXPECT_DOUBLE_EQ(meter.snapshot(1'000'000'000).fps, 0.0);
    meter.record(1'000'000'000, 3.0);
    const auto s = meter.snapshot(3'000'000'000);
    EXPECT_DOUBLE_EQ(s.fps, 0.0);
    EXPECT_DOUBLE_EQ(s.latency_p50, 0.0);
}

TEST(FpsMeter, NearestRankPercentiles) {
    EXPECT_DOUBLE_EQ(rt::nearest_rank({10, 20, 30, 40}, 50), 20.0);
    EXPECT_DOUBLE_EQ(rt::nearest_rank({40, 10, 30, 20}, 95), 40.0);
    EXPECT_DOUBLE_EQ(rt::nearest_rank({7}, 50), 7.0);
    // Nearest rank: ceil(p/100 * n), 1-based, against a sorted copy.
    std::vector<double> v;
    for (int i = 100; i >= 1; --i) v.push_back(i);
    for (int p = 1; p <= 100; ++p) EXPECT_DOUBLE_EQ(rt::nearest_rank(v, p), p);

    rt::FpsMeter meter;
    const double lat[] = {10, 20, 30, 40};
    for (int i = 0; i < 4; ++i) meter.record(100'000'000LL * (i + 1), lat[i]);
    const auto s = meter.snapshot(500'000'000);
    EXPECT_DOUBLE_EQ(s.latency_p50, 20.0);
    EXPECT_DOUBLE_EQ(s.latency_p95, 40.0);
}

TEST(FrameSource, ParsesSpecs) {
    EXPECT_NE(rt::make_source("synthetic:flakes")->describe().find("flakes"), std::string::npos);
    EXPECT_NO_THROW(rt::make_source("synthetic:gray@50?frames=3&size=64x48&seed=9"));
    EXPECT_THROW(rt::make_source("synthetic:plaid"), rt::SourceError);
    EXPECT_THROW(rt::make_source("synthetic:gray?size=0x10"), rt::SourceError);
    EXPECT_THROW(rt::make_source("synthetic:gray?bogus=1"), rt::SourceError);
    EXPECT_THROW(rt::make_source("dir:/nonexistent/frames@10"), rt::SourceError);
    EXPECT_THROW(rt::make_source("screen:0,0,100,100"), rt::SourceError);
    EXPECT_THROW(rt::make_source("camera:0"), rt::SourceError);
}

TEST(FrameSource, SyntheticFramesAreOrderedAndFinite) {
    auto src = rt::make_source("synthetic:flakes@1000?frames=5&size=64x48");
    std::stop_source stop;
    std::uint64_t last = 0;
    std::int64_t last_t = 0;
    int n = 0;
    while (auto p = src->next(stop.get_token())) {
        EXPECT_GT(p->frame_id, last);
        EXPECT_GE(p->captured_at, last_t);
        EXPECT_EQ(p->image.width(), 64);
        EXPECT_EQ(p->image.height(), 48);
        last = p->frame_id;
        last_t = p->captured_at;
        ++n;
    }
    EXPECT_EQ(n, 5);
    EXPECT_EQ(last, 5u);
    EXPECT_FALSE(src->next(stop.get_token()).has_value());
}

TEST(FrameSource, DirectoryPlaysImagesInNameOrder) {
    const fs::path dir = fs::temp_directory_path() / "flakelens_dir_source";
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (int i : {2, 0, 1}) {
        const auto img = fl::core::ImageBuffer::filled(16 + i, 8, 10, 20, 30);
        const auto bytes = fl::core::encode_jpeg(img, 90);
        std::ofstream(dir / ("f" + std::to_string(i) + ".jpg"), std::ios::binary)
            .write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }
    auto src = rt::make_source("dir:" + dir.string() + "@1000");
    std::stop_source stop;
    std::vector<int> widths;
    while (auto p = src->next(stop.get_token())) widths.push_back(p->image.width());
    EXPECT_EQ(widths, (std::vector<int>{16, 17, 18}));
    fs::remove_all(dir);
}

TEST(FrameSource, PacingFollowsRate) {
    auto src = synthetic(100.0, 11, 32, 32);
    std::stop_source stop;
    const auto t0 = rt::Clock::now();
    while (src->next(stop.get_token())) {
    }
    const double ms = std::chrono::duration<double, std::milli>(rt::Clock::now() - t0).count();
    EXPECT_GE(ms, 95.0);
    EXPECT_LT(ms, 400.0);
}

TEST(Annotate, NoDetectionsOrOverlaysOffIsIdentical) {
    const auto img = rt::SyntheticSource({"noise", 0, 1, 96, 64, 3}).next({}).value().image;
    const auto classes = flake_classes();
    EXPECT_EQ(bytes(rt::annotate_frame(img, {}, {}, classes)), bytes(img));

    fl::core::Detection d;
    d.class_id = 1;
    d.confidence = 0.8;
    d.box = {10, 10, 40, 30};
    fl::core::BitMask mask(96, 64);
    mask.set_span(15, 12, 20);
    d.mask = mask;
    rt::OverlayOptions off{false, false, false, false};
    const std::vector<fl::core::Detection> dets{d};
    EXPECT_EQ(bytes(rt::annotate_frame(img, dets, off, classes)), bytes(img));
}

TEST(Annotate, BoxChangesExactlyItsOutlinePixels) {
    const auto img = fl::core::ImageBuffer::filled(80, 60, 1, 2, 3);
    fl::core::Detection d;
    d.class_id = 2;
    d.confidence = 0.5;
    d.box = {10.2, 20.6, 30.4, 41.5};
    const std::vector<fl::core::Detection> dets{d};
    const auto out = rt::annotate_frame(img, dets, {true, false, false, false}, flake_classes());
    // Oracle: pixel (x, y) is covered when its center lies inside the box;
    // the outline is the 2-px frame of that covered rectangle.
    int xs = 80, xe = -1, ys = 60, ye = -1;
    for (int y = 0; y < 60; ++y) {
        for (int x = 0; x < 80; ++x) {
            if (x + 0.5 > d.box.x0 && x + 0.5 < d.box.x1 && y + 0.5 > d.box.y0 && y + 0.5 < d.box.y1) {
                xs = std::min(xs, x), xe = std::max(xe, x), ys = std::min(ys, y), ye = std::max(ye, y);
            }
        }
    }
    const auto c = rt::class_color(2);
    int changed = 0;
    for (int y = 0; y < 60; ++y) {
        for (int x = 0; x < 80; ++x) {
            const bool inside = x >= xs && x <= xe && y >= ys && y <= ye;
            const bool ring = inside && (x < xs + 2 || x > xe - 2 || y < ys + 2 || y > ye - 2);
            for (int ch = 0; ch < 3; ++ch) {
                EXPECT_EQ(out.at(x, y, ch), ring ? c[ch] : img.at(x, y, ch)) << x << "," << y;
            }
            changed += ring;
        }
    }
    EXPECT_EQ(changed, 20 * 20 - 16 * 16);
}

TEST(Annotate, MaskBlendsAtFortyPercent) {
    const auto img = fl::core::ImageBuffer::filled(20, 20, 100, 100, 100);
    fl::core::Detection d;
    d.class_id = 0;
    d.box = {0, 0, 20, 20};
    fl::core::BitMask mask(20, 20);
    mask.set(5, 5);
    d.mask = mask;
    const std::vector<fl::core::Detection> dets{d};
    const auto out = rt::annotate_frame(img, dets, {false, true, false, false}, flake_classes());
    const auto c = rt::class_color(0);
    for (int ch = 0; ch < 3; ++ch) EXPECT_EQ(out.at(5, 5, ch), std::lround(60.0 + 0.4 * c[ch]));
    EXPECT_EQ(out.at(6, 5, 0), 100);
}

TEST(Annotate, Deterministic) {
    const auto img = rt::SyntheticSource({"flakes", 0, 1, 320, 240, 4}).next({}).value().image;
    auto models = stub_registry();
    auto det = models.entries()[0].detector->detect(img, fl::infer::DetectOptions::defaults_for(models.entries()[0].manifest));
    ASSERT_FALSE(det.detections.empty());
    const auto a = rt::annotate_frame(img, det.detections, {}, flake_classes());
    const auto b = rt::annotate_frame(img, det.detections, {}, flake_classes());
    EXPECT_EQ(bytes(a), bytes(b));
    EXPECT_NE(bytes(a), bytes(img));
}

TEST(LiveConfig, InitialConfigUsesFirstModelDefaults) {
    auto models = stub_registry();
    rt::ConfigStore store(models);
    const auto c = store.current();
    EXPECT_EQ(c->model_id, "stub");
    EXPECT_EQ(c->version, 1u);
    EXPECT_DOUBLE_EQ(c->confidence, models.entries()[0].manifest.default_confidence);
    EXPECT_FALSE(c->perturbation.has_value());
}

TEST(LiveConfig, RejectsInvalidFieldsAndKeepsConfig) {
    auto models = stub_registry();
    rt::ConfigStore store(models);
    const auto before = store.current();
    auto r = store.update({{"iou", 1.5}, {"model_id", "nope"}, {"enabled_classes", {0, 7}},
                           {"overlay", {{"boxes", "yes"}}}, {"colour", 1}});
    ASSERT_TRUE(std::holds_alternative<std::vector<rt::FieldError>>(r));
    std::set<std::string> fields;
    for (const auto& e : std::get<std::vector<rt::FieldError>>(r)) fields.insert(e.field);
    EXPECT_EQ(fields, (std::set<std::string>{"iou", "model_id", "enabled_classes", "overlay.boxes", "colour"}));
    EXPECT_EQ(store.current(), before);
    EXPECT_TRUE(std::holds_alternative<std::vector<rt::FieldError>>(store.update({{"confidence", -0.1}})));
    EXPECT_TRUE(std::holds_alternative<std::vector<rt::FieldError>>(store.update({{"perturbation", {{"kind", "blur"}}}})));
    EXPECT_TRUE(std::holds_alternative<std::vector<rt::FieldError>>(store.update(json::array())));
    EXPECT_EQ(store.current()->version, 1u);
}

TEST(LiveConfig, PartialUpdateMergesAndBumpsVersion) {
    auto models = stub_registry();
    rt::ConfigStore store(models);
    auto r = store.update({{"confidence", 0.6}, {"overlay", {{"labels", false}}}});
    ASSERT_TRUE(std::holds_alternative<std::shared_ptr<const rt::LiveConfig>>(r));
    auto c = store.current();
    EXPECT_DOUBLE_EQ(c->confidence, 0.6);
    EXPECT_FALSE(c->overlay.labels);
    EXPECT_TRUE(c->overlay.boxes);
    EXPECT_EQ(c->version, 2u);
    store.update({{"perturbation", {{"kind", "salt_pepper"}, {"strength", 0.2}}}});
    ASSERT_TRUE(store.current()->perturbation.has_value());
    store.update({{"perturbation", nullptr}});
    EXPECT_FALSE(store.current()->perturbation.has_value());
    EXPECT_EQ(store.current()->version, 4u);
    const json j = rt::to_json(*store.current());
    for (const char* k : {"model_id", "confidence", "iou", "enabled_classes", "perturbation", "overlay", "version"}) {
        EXPECT_TRUE(j.contains(k)) << k;
    }
}

TEST(Pipeline, FiftyFramesWithFastEngineAllProcessed) {
    auto models = stub_registry();
    rt::ConfigStore config(models);
    rt::Pipeline p(synthetic(20.0, 50), models, config);
    auto rec = std::make_shared<Recorder>();
    p.add_sink(rec);
    p.run();
    const auto s = p.stats();
    EXPECT_EQ(s.processed, 50u);
    EXPECT_EQ(s.dropped, 0u);
    EXPECT_EQ(s.consumed, 50u);
    EXPECT_TRUE(p.conserved());
    EXPECT_EQ(s.status, "finished");
    ASSERT_EQ(rec->ids.size(), 50u);
    for (std::size_t i = 0; i < rec->ids.size(); ++i) EXPECT_EQ(rec->ids[i], i + 1);
}

TEST(Pipeline, OverloadDropsInsteadOfQueueing) {
    auto models = stub_registry("stub:scene@40");
    rt::ConfigStore config(models);
    rt::Pipeline p(synthetic(200.0, 100), models, config);
    auto rec = std::make_shared<Recorder>();
    p.add_sink(rec);
    p.run();
    const auto s = p.stats();
    EXPECT_EQ(s.consumed, 100u);
    EXPECT_GT(s.dropped, 50u);
    EXPECT_EQ(s.processed + s.dropped, s.consumed);
    EXPECT_TRUE(p.conserved());
    EXPECT_TRUE(std::is_sorted(rec->ids.begin(), rec->ids.end()));
    EXPECT_EQ(std::adjacent_find(rec->ids.begin(), rec->ids.end()), rec->ids.end());
}

TEST(Pipeline, StopTerminatesPromptlyAndFinalizesStats) {
    auto models = stub_registry("stub:scene@5");
    rt::ConfigStore config(models);
    rt::Pipeline p(synthetic(30.0, 0), models, config);
    p.add_sink(std::make_shared<Recorder>());
    p.start();
    std::this_thread::sleep_for(300ms);
    const auto t0 = rt::Clock::now();
    p.stop();
    const double ms = std::chrono::duration<double, std::milli>(rt::Clock::now() - t0).count();
    EXPECT_LT(ms, 1000.0 / 30.0 + 10.0);
    EXPECT_FALSE(p.running());
    const auto s = p.stats();
    EXPECT_EQ(s.status, "stopped");
    EXPECT_GT(s.processed, 0u);
    EXPECT_TRUE(p.conserved());
    p.stop();
    EXPECT_EQ(p.stats().processed, s.processed);
}

TEST(Pipeline, EngineFailureStopsWithTerminalStatus) {
    auto manifest = stub_manifest("broken", "stub:scene");
    auto engine = std::make_unique<fl::infer::StubEngine>(manifest, fl::infer::StubEngine::scenario("scene", manifest));
    engine->set_failure(true);
    rt::ModelRegistry models({{manifest, std::make_shared<fl::infer::Detector>(manifest, std::move(engine))}});
    rt::ConfigStore config(models);
    rt::Pipeline p(synthetic(0.0, 0), models, config);
    p.add_sink(std::make_shared<Recorder>());
    p.run();
    EXPECT_EQ(p.stats().status, "failed");
    EXPECT_FALSE(p.error().empty());
    EXPECT_TRUE(p.conserved());
}

TEST(Pipeline, ThrowingSinkIsDetached) {
    auto models = stub_registry();
    rt::ConfigStore config(models);
    rt::Pipeline p(synthetic(0.0, 10), models, config);
    auto bad = std::make_shared<Throwing>();
    auto rec = std::make_shared<Recorder>();
    p.add_sink(bad);
    p.add_sink(rec);
    p.run();
    EXPECT_EQ(bad->calls, 1);
    EXPECT_EQ(p.sink_count(), 1u);
    EXPECT_EQ(p.stats().processed, rec->ids.size());
}

TEST(Pipeline, RequiresASink) {
    auto models = stub_registry();
    rt::ConfigStore config(models);
    rt::Pipeline p(synthetic(0.0, 1), models, config);
    EXPECT_THROW(p.start(), std::logic_error);
}

TEST(Pipeline, FramesCarryTheConfigVersionTheyRanWith) {
    auto models = stub_registry("stub:scene@2");
    rt::ConfigStore config(models);
    rt::Pipeline p(synthetic(200.0, 120), models, config);
    auto rec = std::make_shared<Recorder>();
    p.add_sink(rec);
    p.start();
    for (int i = 0; i < 5; ++i) {
        std::this_thread::sleep_for(60ms);
        config.update({{"confidence", 0.1 * (i + 1)}});
    }
    p.wait();
    EXPECT_TRUE(std::is_sorted(rec->versions.begin(), rec->versions.end()));
    EXPECT_GT(rec->versions.back(), rec->versions.front());
}

// ---- HTTP / WebSocket --------------------------------------------------------

namespace {

struct HttpReply {
    int status = 0;
    std::string content_type;
    std::string body;
};

HttpReply request(unsigned short port, http::verb verb, const std::string& target, const std::string& body = {}) {
    boost::asio::io_context ioc;
    tcp::socket s(ioc);
    s.connect(tcp::endpoint(boost::asio::ip::make_address("127.0.0.1"), port));
    http::request<http::string_body> req{verb, target, 11};
    req.set(http::field::host, "localhost");
    if (!body.empty()) {
        req.set(http::field::content_type, "application/json");
        req.body() = body;
    }
    req.prepare_payload();
    http::write(s, req);
    beast::flat_buffer buf;
    http::response<http::string_body> res;
    http::read(s, buf, res);
    beast::error_code ec;
    s.shutdown(tcp::socket::shutdown_both, ec);
    return {static_cast<int>(res.result_int()), std::string(res[http::field::content_type]), res.body()};
}

struct ServerFixture : ::testing::Test {
    std::string model_path = "stub:scene@3";
    std::unique_ptr<rt::ModelRegistry> models;
    std::unique_ptr<rt::ConfigStore> config;
    std::unique_ptr<rt::Pipeline> pipeline;
    std::unique_ptr<rt::Server> server;
    fs::path snapshots = fs::temp_directory_path() / "flakelens_snapshots_test";

    void launch(std::unique_ptr<rt::FrameSource> source, bool start_pipeline = true) {
        fs::remove_all(snapshots);
        models = std::make_unique<rt::ModelRegistry>(stub_registry(model_path));
        config = std::make_unique<rt::ConfigStore>(*models);
        pipeline = std::make_unique<rt::Pipeline>(std::move(source), *models, *config);
        rt::ServerOptions o;
        o.port = 0;
        o.snapshot_dir = snapshots;
        server = std::make_unique<rt::Server>(o, *pipeline, *config, *models);
        server->start();
        if (start_pipeline) pipeline->start();
    }

    void TearDown() override {
        if (pipeline) pipeline->stop();
        if (server) server->stop();
        fs::remove_all(snapshots);
    }
};

}  // namespace

TEST_F(ServerFixture, ModelsConfigAndErrors) {
    launch(synthetic(30.0, 0), false);
    const unsigned short port = server->port();
    ASSERT_NE(port, 0);

    auto models_reply = request(port, http::verb::get, "/models");
    EXPECT_EQ(models_reply.status, 200);
    const json m = json::parse(models_reply.body);
    EXPECT_EQ(m["active"], "stub");
    EXPECT_EQ(m["models"].size(), 1u);

    auto cfg = request(port, http::verb::get, "/config");
    EXPECT_EQ(cfg.status, 200);
    EXPECT_EQ(json::parse(cfg.body)["version"], 1);

    auto bad = request(port, http::verb::put, "/config", R"({"iou": 1.5})");
    EXPECT_EQ(bad.status, 422);
    const json errors = json::parse(bad.body)["errors"];
    ASSERT_EQ(errors.size(), 1u);
    EXPECT_EQ(errors[0]["field"], "iou");
    EXPECT_EQ(json::parse(request(port, http::verb::get, "/config").body), json::parse(cfg.body));

    EXPECT_EQ(request(port, http::verb::put, "/config", "{not json").status, 400);
    auto ok = request(port, http::verb::put, "/config", R"({"confidence": 0.5})");
    EXPECT_EQ(ok.status, 200);
    EXPECT_EQ(json::parse(ok.body)["version"], 2);

    EXPECT_EQ(request(port, http::verb::get, "/nowhere").status, 404);
    EXPECT_EQ(request(port, http::verb::delete_, "/config").status, 405);
    EXPECT_EQ(request(port, http::verb::options, "/config").status, 204);
    EXPECT_EQ(request(port, http::verb::post, "/snapshot").status, 409);
}

TEST_F(ServerFixture, IdleStatsAreZeroAndStable) {
    launch(synthetic(200.0, 20));
    pipeline->wait();
    std::this_thread::sleep_for(1100ms);
    const json a = json::parse(request(server->port(), http::verb::get, "/stats").body);
    const json b = json::parse(request(server->port(), http::verb::get, "/stats").body);
    EXPECT_DOUBLE_EQ(a["fps"].get<double>(), 0.0);
    for (const char* k : {"processed", "dropped", "consumed"}) EXPECT_EQ(a[k], b[k]) << k;
    EXPECT_EQ(a["processed"].get<int>() + a["dropped"].get<int>(), a["consumed"].get<int>());
    EXPECT_TRUE(a.contains("morphology"));
    EXPECT_TRUE(a.contains("latency_p50"));
}

TEST_F(ServerFixture, WebSocketCountsRiseWhenConfidenceFalls) {
    launch(synthetic(60.0, 0));
    ASSERT_EQ(request(server->port(), http::verb::put, "/config", R"({"confidence": 0.9})").status, 200);

    boost::asio::io_context ioc;
    websocket::stream<tcp::socket> ws(ioc);
    ws.next_layer().connect(tcp::endpoint(boost::asio::ip::make_address("127.0.0.1"), server->port()));
    ws.handshake("localhost", "/detections");

    auto read = [&] {
        beast::flat_buffer buf;
        ws.read(buf);
        EXPECT_TRUE(ws.got_text());
        return json::parse(beast::buffers_to_string(buf.data()));
    };
    std::uint64_t last_id = 0;
    std::vector<std::pair<std::uint64_t, std::size_t>> seen;  // (config_version, count)
    bool lowered = false;
    for (int i = 0; i < 40; ++i) {
        const json msg = read();
        EXPECT_GT(msg["frame_id"].get<std::uint64_t>(), last_id);
        last_id = msg["frame_id"];
        EXPECT_TRUE(msg.contains("timings"));
        EXPECT_TRUE(msg.contains("morphology"));
        seen.emplace_back(msg["config_version"], msg["detections"].size());
        if (i == 15 && !lowered) {
            EXPECT_EQ(request(server->port(), http::verb::put, "/config", R"({"confidence": 0.1})").status, 200);
            lowered = true;
        }
    }
    ws.close(websocket::close_code::normal);

    std::size_t high_max = 0, low_min = SIZE_MAX;
    for (auto [v, n] : seen) {
        if (v == 2) high_max = std::max(high_max, n);
        if (v == 3) low_min = std::min(low_min, n);
    }
    ASSERT_NE(low_min, SIZE_MAX);
    EXPECT_LE(high_max, low_min);
    EXPECT_GT(low_min, high_max);  // the scene has candidates between 0.1 and 0.9
    // Frames already in flight before the first PUT still carry version 1.
    // From the 0.9 config on, counts weakly increase since the version only rises.
    std::size_t prev = 0;
    for (auto [v, n] : seen) {
        if (v < 2) continue;
        EXPECT_GE(n, prev);
        prev = n;
    }
}

TEST_F(ServerFixture, StreamDeliversJpegParts) {
    launch(synthetic(30.0, 0));
    boost::asio::io_context ioc;
    tcp::socket s(ioc);
    s.connect(tcp::endpoint(boost::asio::ip::make_address("127.0.0.1"), server->port()));
    const std::string req = "GET /stream HTTP/1.1\r\nHost: localhost\r\n\r\n";
    boost::asio::write(s, boost::asio::buffer(req));
    std::string data;
    std::array<char, 8192> chunk{};
    beast::error_code ec;
    const std::string soi("\xFF\xD8\xFF", 3);
    while (data.size() < 200000 && !ec) {
        const auto n = s.read_some(boost::asio::buffer(chunk), ec);
        data.append(chunk.data(), n);
        const auto first = data.find("--flakelensframe");
        if (first != std::string::npos && data.find("--flakelensframe", first + 1) != std::string::npos) break;
    }
    s.close();
    EXPECT_NE(data.find("multipart/x-mixed-replace; boundary=flakelensframe"), std::string::npos);
    const auto part = data.find("Content-Type: image/jpeg");
    ASSERT_NE(part, std::string::npos);
    const auto body = data.find("\r\n\r\n", part) + 4;
    EXPECT_EQ(data.substr(body, 3), soi);
}

TEST_F(ServerFixture, SnapshotWritesImageAndDetections) {
    launch(synthetic(30.0, 0));
    std::this_thread::sleep_for(300ms);
    auto reply = request(server->port(), http::verb::post, "/snapshot");
    ASSERT_EQ(reply.status, 200);
    const json j = json::parse(reply.body);
    const auto id = j["frame_id"].get<std::uint64_t>();
    ASSERT_EQ(j["files"].size(), 2u);
    EXPECT_EQ(j["files"][0], std::to_string(id) + ".jpg");
    const auto img = fl::core::load_image(snapshots / (std::to_string(id) + ".jpg"));
    EXPECT_EQ(img.width(), 320);
    std::ifstream meta(snapshots / (std::to_string(id) + ".json"));
    const json m = json::parse(meta);
    EXPECT_EQ(m["frame_id"], id);
    EXPECT_FALSE(m["detections"].empty());
}

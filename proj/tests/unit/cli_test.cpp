// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "flakelens/cli/cli.hpp"
#include "flakelens/core/image_io.hpp"
#include "flakelens/infer/manifest.hpp"
#include "flakelens/infer/stub_engine.hpp"

namespace fl = flakelens;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "flakelens");
    std::ostringstream out, err;
    const int code = fl::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

const fs::path kCorpus = fs::path(FLAKELENS_FIXTURES) / "eval_corpus";

class TempDir {
public:
    explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("flakelens_cli_" + name)) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

fs::path write_stub_manifest(const fs::path& dir, const std::string& scenario, const fl::core::ClassSet& classes) {
    auto m = fl::infer::StubEngine::make_manifest(classes);
    m.model_path = "stub:" + scenario;
    const fs::path p = dir / (scenario + ".manifest");
    std::ofstream(p) << fl::infer::to_json(m).dump(2);
    return p;
}

}  // namespace

TEST(Cli, EvalOnFixtureCorpusPrintsMap50) {
    const auto r = run({"eval", "--pred", (kCorpus / "pred").string(), "--gt", (kCorpus / "gt").string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("mAP50: 0.547436\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("mAP50-90: 0.463754\n"), std::string::npos);
}

TEST(Cli, EvalJsonAndReportFile) {
    TempDir tmp("eval");
    const auto r = run({"eval", "--pred", (kCorpus / "pred").string(), "--gt", (kCorpus / "gt").string(), "--json",
                        "--range-end", "95", "-o", (tmp.path() / "report.json").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_NEAR(j["mAP50"].get<double>(), 427.0 / 780.0, 1e-6);
    EXPECT_TRUE(fs::exists(tmp.path() / "report.json"));
}

TEST(Cli, ConfigFileSuppliesFlags) {
    TempDir tmp("config");
    const fs::path cfg = tmp.path() / "flags.json";
    std::ofstream(cfg) << json{{"eval", {{"pred", (kCorpus / "pred").string()},
                                         {"gt", (kCorpus / "gt").string()},
                                         {"json", true}}}}
                              .dump();
    const auto r = run({"--config", cfg.string(), "eval"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(json::parse(r.out)["mAP50"].get<double>(), 427.0 / 780.0, 1e-6);
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run({"eval", "--pred", "a", "--gt", "b", "--bogus"}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"eval", "--pred", "a"}).code, 2);
    EXPECT_EQ(run({"eval", "--pred", "a", "--gt", "b", "--range-end", "80"}).code, 2);
    const auto r = run({"eval", "--pred", "a", "--gt", "b", "--bogus"});
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST(Cli, OperationalErrorsExitOne) {
    const auto r = run({"eval", "--pred", "/nonexistent/pred", "--gt", (kCorpus / "gt").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("/nonexistent/pred"), std::string::npos);
}

TEST(Cli, HelpOnEverySubcommandExitsZeroAndListsFlags) {
    const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> cases = {
        {{}, {"--config", "dataset", "infer", "eval", "robust", "quantify", "serve", "bench"}},
        {{"dataset"}, {"tile", "split", "augment"}},
        {{"dataset", "tile"}, {"--out", "--tile", "--overlap"}},
        {{"dataset", "split"}, {"--ratio", "--seed"}},
        {{"dataset", "augment"}, {"--out", "--op", "--seed"}},
        {{"infer"}, {"--model", "--out", "--annotated", "--conf", "--iou", "--class-agnostic", "--no-masks"}},
        {{"eval"}, {"--pred", "--gt", "--classes", "--geometry", "--range-end", "--json", "--out"}},
        {{"robust"}, {"--model", "--images", "--out", "--perturb", "--seed"}},
        {{"quantify"}, {"--pred", "--classes", "--basis", "--compare", "--json"}},
        {{"serve"}, {"--source", "--model", "--address", "--port", "--snapshots", "--duration", "--seed"}},
        {{"bench"}, {"--engine", "--latency-ms", "--source", "--seconds", "--seed", "--no-annotate"}},
    };
    for (const auto& [path, flags] : cases) {
        auto args = path;
        args.push_back("--help");
        const auto r = run(args);
        EXPECT_EQ(r.code, 0);
        for (const auto& f : flags) EXPECT_NE(r.out.find(f), std::string::npos) << f << " in help of " << args[0];
    }
}

TEST(Cli, InferOnEmptyDirectoryIsAVacuousSuccess) {
    TempDir tmp("empty");
    const auto r = run({"infer", tmp.path().string(), "--model",
                        (fs::path(FLAKELENS_MODELS) / "tiny_seg.manifest").string()});
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST(Cli, InferThenQuantifyReproducesAreaFraction) {
    TempDir tmp("quantify");
    const fl::core::ClassSet shapes({"triangle", "hexagon"});
    const auto manifest = write_stub_manifest(tmp.path(), "fixture1760", shapes);
    fs::create_directories(tmp.path() / "images");
    fl::core::save_image(fl::core::ImageBuffer(100, 100), tmp.path() / "images" / "a.png");
    const auto pred = tmp.path() / "pred";
    auto r = run({"infer", (tmp.path() / "images").string(), "-m", manifest.string(), "-o", pred.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["detections"].size(), 1u);
    r = run({"quantify", "--pred", pred.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("triangle: 17.60%\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("triangle.count: 1\n"), std::string::npos);
    r = run({"quantify", "--pred", pred.string(), "--basis", "box"});
    EXPECT_NE(r.out.find("triangle: 17.60%\n"), std::string::npos) << r.out;
}

TEST(Cli, QuantifyCompareReportsCountDeltas) {
    TempDir tmp("compare");
    const fl::core::ClassSet classes({"thin", "thick", "bulk"});
    const auto scene = write_stub_manifest(tmp.path(), "scene", classes);
    const auto empty = write_stub_manifest(tmp.path(), "empty", classes);
    fs::create_directories(tmp.path() / "images");
    fl::core::save_image(fl::core::ImageBuffer(320, 240), tmp.path() / "images" / "a.png");
    ASSERT_EQ(run({"infer", (tmp.path() / "images").string(), "-m", scene.string(), "-o",
                   (tmp.path() / "full").string()}).code, 0);
    ASSERT_EQ(run({"infer", (tmp.path() / "images").string(), "-m", empty.string(), "-o",
                   (tmp.path() / "none").string()}).code, 0);
    const auto r = run({"quantify", "--pred", (tmp.path() / "full").string(), "--compare",
                        (tmp.path() / "none").string(), "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string deltas = json::parse(r.out)["count_deltas"];
    EXPECT_EQ(deltas.front(), '{');
    EXPECT_NE(deltas.find("thin:+"), std::string::npos) << deltas;
}

TEST(Cli, DatasetTileSplitAugment) {
    TempDir tmp("dataset");
    const fs::path src = tmp.path() / "src";
    fs::create_directories(src / "images");
    fs::create_directories(src / "labels");
    std::ofstream(src / "classes.txt") << "thin\nthick\n";
    for (int i = 0; i < 3; ++i) {
        const std::string id = "m" + std::to_string(i);
        fl::core::save_image(fl::core::ImageBuffer(300, 200), src / "images" / (id + ".png"));
        std::ofstream(src / "labels" / (id + ".txt")) << "0 0.100000 0.100000 0.300000 0.100000 0.200000 0.300000\n";
    }
    const fs::path tiles = tmp.path() / "tiles";
    auto r = run({"dataset", "tile", src.string(), "-o", tiles.string(), "--tile", "128"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("tiles: 18\n"), std::string::npos) << r.out;
    EXPECT_TRUE(fs::exists(tiles / "images" / "m0_x0_y0.png"));
    EXPECT_TRUE(fs::exists(tiles / "labels" / "m0_x0_y0.txt"));
    EXPECT_TRUE(fs::exists(tiles / "tiles.json"));

    r = run({"dataset", "split", tiles.string(), "--seed", "5", "--ratio", "0.67"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json split = json::parse(std::ifstream(tiles / "split.json"));
    // Tiles of one source image stay on one side.
    for (const auto& side : {"train", "val"}) {
        for (const auto& id : split[side]) {
            const std::string source = id.get<std::string>().substr(0, 2);
            const auto& other = split[std::string(side) == "train" ? "val" : "train"];
            for (const auto& o : other) EXPECT_NE(o.get<std::string>().substr(0, 2), source);
        }
    }
    ASSERT_EQ(run({"dataset", "split", tiles.string(), "--seed", "5", "--ratio", "0.67"}).code, 0);
    EXPECT_EQ(json::parse(std::ifstream(tiles / "split.json")), split);

    const fs::path aug = tmp.path() / "aug";
    r = run({"dataset", "augment", src.string(), "-o", aug.string(), "--op", "hflip", "--op", "noise:0.05"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("examples: 9\n"), std::string::npos);
    std::ifstream flipped(aug / "labels" / "m0_aug0.txt");
    std::string line;
    std::getline(flipped, line);
    EXPECT_EQ(line.substr(0, 2), "0 ");
    EXPECT_EQ(run({"dataset", "augment", src.string(), "-o", aug.string(), "--op", "melt"}).code, 1);
}

TEST(Cli, RobustWritesCsvAndMetadata) {
    TempDir tmp("robust");
    const auto manifest = write_stub_manifest(tmp.path(), "scene", fl::core::ClassSet({"thin", "thick", "bulk"}));
    fs::create_directories(tmp.path() / "images");
    fl::core::save_image(fl::core::ImageBuffer::filled(320, 240, 120, 120, 120), tmp.path() / "images" / "a.png");
    const auto csv = tmp.path() / "out" / "robust.csv";
    const auto r = run({"robust", "-m", manifest.string(), "--images", (tmp.path() / "images").string(), "-o",
                        csv.string(), "--seed", "7", "--perturb", "gaussian", "--perturb", "brightness:1.2"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(csv);
    std::string header, row;
    std::getline(in, header);
    EXPECT_EQ(header, "image,kind,strength,seed,match_rate,class_consistency,mean_iou,count_delta");
    int rows = 0;
    while (std::getline(in, row)) ++rows;
    EXPECT_EQ(rows, 2);
    const json meta = json::parse(std::ifstream(tmp.path() / "out" / "robust.meta.json"));
    EXPECT_EQ(meta["seed"], 7);
    EXPECT_EQ(meta["battery"].size(), 2u);
    EXPECT_TRUE(meta.contains("conventions"));
}

TEST(Cli, BenchPrintsConservedStats) {
    const auto r = run({"bench", "--latency-ms", "5", "--seconds", "1", "--source", "synthetic:flakes@60?size=320x240"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_TRUE(j["conserved"].get<bool>());
    EXPECT_GT(j["processed"].get<int>(), 0);
    EXPECT_EQ(j["processed"].get<int>() + j["dropped"].get<int>(), j["consumed"].get<int>());
}

TEST(Cli, ServeRunsForDurationAndReportsStats) {
    TempDir tmp("serve");
    const auto manifest = write_stub_manifest(tmp.path(), "scene", fl::core::ClassSet({"thin", "thick", "bulk"}));
    const auto r = run({"serve", "--source", "synthetic:gray@30?size=160x120", "-m", manifest.string(), "--port", "0",
                        "--duration", "0.5", "--snapshots", (tmp.path() / "snaps").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("listening on http://127.0.0.1:", 0), 0u) << r.out;
    const json stats = json::parse(r.out.substr(r.out.find('\n') + 1));
    EXPECT_EQ(stats["processed"].get<int>() + stats["dropped"].get<int>(), stats["consumed"].get<int>());
    EXPECT_EQ(run({"serve", "--source", "screen:0,0,10,10", "-m", manifest.string(), "--port", "0"}).code, 1);
}

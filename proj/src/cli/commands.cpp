// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <sys/resource.h>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <thread>

#include "flakelens/core/image_io.hpp"
#include "flakelens/dataset/augment.hpp"
#include "flakelens/dataset/labels.hpp"
#include "flakelens/dataset/layout.hpp"
#include "flakelens/dataset/split.hpp"
#include "flakelens/dataset/tiling.hpp"
#include "flakelens/infer/detector.hpp"
#include "flakelens/infer/records.hpp"
#include "flakelens/infer/stub_engine.hpp"
#include "flakelens/metrics/report.hpp"
#include "flakelens/quantify/morphology.hpp"
#include "flakelens/robust/stability.hpp"
#include "flakelens/rtserve/annotate.hpp"
#include "flakelens/rtserve/pipeline.hpp"
#include "flakelens/rtserve/server.hpp"

namespace flakelens::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

core::ClassSet read_classes_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw CommandError("cannot read class list " + path.string());
    std::vector<std::string> names;
    for (std::string line; std::getline(in, line);) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) names.push_back(line);
    }
    return core::ClassSet(names);
}

void write_classes_file(const core::ClassSet& classes, const fs::path& path) {
    std::ofstream out(path);
    for (const auto& n : classes.names()) out << n << '\n';
    if (!out) throw CommandError("cannot write " + path.string());
}

/// --classes if given, else classes.txt inside (or next to) `dir`.
core::ClassSet resolve_classes(const std::optional<fs::path>& explicit_path, const fs::path& dir) {
    if (explicit_path) return read_classes_file(*explicit_path);
    for (const fs::path& p : {dir / "classes.txt", dir.parent_path() / "classes.txt"}) {
        if (fs::exists(p)) return read_classes_file(p);
    }
    throw CommandError("no classes.txt in " + dir.string() + "; pass --classes");
}

void require_dir(const fs::path& dir, const std::string& what) {
    if (!fs::is_directory(dir)) throw CommandError(what + " directory not found: " + dir.string());
}

/// FNV-1a; mixes the example id into the seed so each example gets its own stream.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view id) {
    std::uint64_t h = 1469598103934665603ULL ^ seed;
    for (unsigned char c : id) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::optional<core::ClassSet> dataset_classes(const dataset::DatasetLayout& layout) {
    auto classes = layout.read_classes();
    if (!classes && fs::is_directory(layout.labels_dir())) {
        throw CommandError("labels found but no classes.txt in " + layout.root.string());
    }
    return classes;
}

std::vector<core::Instance> example_labels(const dataset::DatasetLayout& layout, const fs::path& image,
                                           const std::optional<core::ClassSet>& classes) {
    const fs::path label = layout.label_for(image);
    if (!classes || !fs::exists(label)) return {};
    return dataset::read_label_path(label, *classes);
}

infer::DetectOptions detect_options(const infer::ModelManifest& m, std::optional<double> conf, std::optional<double> iou) {
    auto o = infer::DetectOptions::defaults_for(m);
    if (conf) o.confidence = *conf;
    if (iou) o.iou = *iou;
    return o;
}

std::vector<fs::path> input_images(const fs::path& input) {
    if (fs::is_directory(input)) return core::list_images(input);
    if (fs::is_regular_file(input)) return {input};
    throw CommandError("input not found: " + input.string());
}

std::atomic<bool> g_interrupted{false};
extern "C" void on_signal(int) { g_interrupted = true; }

long peak_rss_kb() {
    rusage u{};
    getrusage(RUSAGE_SELF, &u);
    return u.ru_maxrss;
}

/// Drops published frames; the bench measures the pipeline alone.
struct NullSink : rtserve::FrameSink {
    void on_frame(const rtserve::PublishedFrame&) override {}
};

}  // namespace

void dataset_tile(const TileArgs& a, Streams io) {
    const dataset::DatasetLayout in{a.input}, out{a.output};
    require_dir(in.images_dir(), "images");
    const auto classes = dataset_classes(in);
    const auto images = core::list_images(in.images_dir());
    out.create();
    if (classes) out.write_classes(*classes);
    json grids = json::object();
    std::size_t tiles = 0, labels = 0;
    for (const auto& path : images) {
        const auto img = core::load_image(path);
        const auto tiled = dataset::tile_image(img, a.tile, a.overlap);
        const auto instances = example_labels(in, path, classes);
        const auto per_tile = dataset::retile_annotations(instances, tiled.grid);
        json entry = {{"width", img.width()}, {"height", img.height()}, {"tile", a.tile}, {"overlap", a.overlap},
                      {"tiles", json::array()}};
        for (std::size_t i = 0; i < tiled.tiles.size(); ++i) {
            const auto& off = tiled.grid.tiles[i];
            const std::string id =
                path.stem().string() + "_x" + std::to_string(off.x) + "_y" + std::to_string(off.y);
            core::save_image(tiled.tiles[i], out.images_dir() / (id + ".png"));
            if (classes) {
                dataset::write_label_path(out.labels_dir() / (id + ".txt"), per_tile[i]);
                labels += per_tile[i].size();
            }
            entry["tiles"].push_back({{"id", id},
                                      {"x", off.x},
                                      {"y", off.y},
                                      {"padded_px", tiled.grid.padded_area(i)}});
            ++tiles;
        }
        grids[path.stem().string()] = entry;
    }
    std::ofstream meta(out.root / "tiles.json");
    meta << grids.dump(2) << '\n';
    if (!meta) throw CommandError("cannot write " + (out.root / "tiles.json").string());
    if (images.empty()) io.err << "warning: no images in " << in.images_dir().string() << '\n';
    io.out << "images: " << images.size() << "\ntiles: " << tiles << "\ninstances: " << labels << '\n';
}

void dataset_split(const SplitArgs& a, Streams io) {
    const dataset::DatasetLayout layout{a.root};
    require_dir(layout.images_dir(), "images");
    const auto ids = layout.example_ids();
    if (ids.empty()) throw CommandError("no images in " + layout.images_dir().string());
    const auto m = dataset::split_dataset(std::span<const std::string>(ids), a.ratio, a.seed);
    dataset::save_split(m, layout.split_path());
    io.out << "train: " << m.train.size() << "\nval: " << m.val.size() << "\nmanifest: " << layout.split_path().string()
           << '\n';
}

void dataset_augment(const AugmentArgs& a, Streams io) {
    const dataset::DatasetLayout in{a.input}, out{a.output};
    require_dir(in.images_dir(), "images");
    if (a.ops.empty()) throw CommandError("no augmentation ops given");
    std::vector<dataset::AugmentOp> ops;
    for (const auto& text : a.ops) ops.push_back(dataset::parse_augment_op(text));
    const auto classes = dataset_classes(in);
    out.create();
    if (classes) out.write_classes(*classes);
    std::size_t written = 0;
    for (const auto& path : core::list_images(in.images_dir())) {
        const std::string id = path.stem().string();
        dataset::LabeledExample ex{core::load_image(path), example_labels(in, path, classes), id, {}};
        auto save = [&](const dataset::LabeledExample& e, const std::string& name) {
            core::save_image(e.image, out.images_dir() / (name + ".png"));
            if (classes) dataset::write_label_path(out.labels_dir() / (name + ".txt"), e.instances);
            ++written;
        };
        save(ex, id);
        const auto variants = dataset::augment(ex, ops, mix_seed(a.seed, id));
        for (std::size_t k = 0; k < variants.size(); ++k) save(variants[k], id + "_aug" + std::to_string(k));
    }
    io.out << "examples: " << written << '\n';
}

void infer(const InferArgs& a, Streams io) {
    const auto manifest = infer::load_manifest(a.model);
    const auto images = input_images(a.input);
    if (images.empty()) {
        io.err << "warning: no images in " << a.input.string() << '\n';
        return;
    }
    infer::Detector detector(manifest);
    auto options = detect_options(manifest, a.confidence, a.iou);
    options.class_aware = !a.class_agnostic;
    options.masks = !a.no_masks;
    const auto& classes = manifest.class_set;
    if (a.output) {
        fs::create_directories(*a.output);
        write_classes_file(classes, *a.output / "classes.txt");
    }
    if (a.annotated) fs::create_directories(*a.annotated);
    for (const auto& path : images) {
        const auto img = core::load_image(path);
        const auto result = detector.detect(img, options);
        const infer::PredictionFile pred{path.filename().string(), img.width(), img.height(), result.detections};
        io.out << infer::to_json(pred, classes, false).dump() << '\n';
        if (a.output) infer::save_prediction(pred, classes, *a.output / (path.stem().string() + ".json"));
        if (a.annotated) {
            const auto drawn = rtserve::annotate_frame(img, result.detections, {}, classes);
            core::save_image(drawn, *a.annotated / (path.stem().string() + ".png"));
        }
    }
}

void eval(const EvalArgs& a, Streams io) {
    require_dir(a.pred, "prediction");
    require_dir(a.gt, "ground-truth");
    const auto classes = resolve_classes(a.classes, a.gt);
    metrics::EvalConfig config;
    config.geometry = metrics::parse_geometry(a.geometry);
    config.range_end = a.range_end;
    config.confusion_iou = a.confusion_iou;
    config.confusion_conf = a.confusion_conf;
    const auto corpus = metrics::load_corpus(a.pred, a.gt, classes);
    const auto report = metrics::evaluate(corpus, classes, config);
    if (a.json) {
        io.out << metrics::to_json(report).dump(2) << '\n';
    } else {
        io.out << metrics::format_report(report);
    }
    if (a.output) metrics::write_report(report, *a.output);
}

void robust(const RobustArgs& a, Streams io) {
    const auto manifest = infer::load_manifest(a.model);
    require_dir(a.images, "images");
    const auto images = core::list_images(a.images);
    std::vector<robust::Perturbation> battery;
    if (a.perturbations.empty()) {
        battery = robust::standard_battery(a.seed);
    } else {
        for (const auto& spec : a.perturbations) battery.push_back(robust::parse_perturbation(spec, a.seed));
    }
    infer::Detector detector(manifest);
    const auto options = detect_options(manifest, a.confidence, a.iou);
    std::vector<robust::RobustRecord> records;
    for (const auto& path : images) {
        const auto img = core::load_image(path);
        auto r = robust::run_battery(detector, img, path.filename().string(), battery, options);
        records.insert(records.end(), r.begin(), r.end());
    }
    if (a.output.has_parent_path()) fs::create_directories(a.output.parent_path());
    robust::write_csv(a.output, records);

    json meta = {{"model", manifest.id},
                 {"images", images.size()},
                 {"seed", a.seed},
                 {"confidence", options.confidence},
                 {"iou", options.iou},
                 {"battery", json::array()},
                 {"conventions", robust::perturbation_conventions()}};
    for (const auto& p : battery) meta["battery"].push_back(robust::to_json(p));
    fs::path meta_path = a.output;
    meta_path.replace_extension(".meta.json");
    std::ofstream(meta_path) << meta.dump(2) << '\n';

    if (images.empty()) io.err << "warning: no images in " << a.images.string() << '\n';
    // Mean per perturbation, in battery order.
    io.out << "perturbation,images,mean_match_rate,mean_class_consistency,mean_count_delta\n";
    for (const auto& p : battery) {
        double match = 0, consistency = 0, delta = 0;
        std::size_t n = 0;
        for (const auto& r : records) {
            if (r.perturbation.label() != p.label()) continue;
            match += r.report.match_rate;
            consistency += r.report.class_consistency;
            delta += static_cast<double>(r.report.count_delta);
            ++n;
        }
        const double d = n ? static_cast<double>(n) : 1.0;
        io.out << p.label() << ',' << n << ',' << std::fixed << std::setprecision(6) << match / d << ','
               << consistency / d << ',' << delta / d << '\n'
               << std::defaultfloat;
    }
    io.err << "wrote " << a.output.string() << " and " << meta_path.string() << '\n';
}

namespace {

struct PredictionTotals {
    quantify::MorphologyReport report;
    std::vector<long> counts;
};

PredictionTotals summarize_predictions(const fs::path& dir, const core::ClassSet& classes, quantify::AreaBasis basis) {
    require_dir(dir, "prediction");
    PredictionTotals t;
    t.report.basis = basis;
    t.counts.assign(classes.size(), 0);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        const auto pred = infer::load_prediction(f, classes);
        quantify::accumulate(t.report, quantify::area_fractions(pred.detections, pred.width, pred.height, classes, basis));
        const auto c = quantify::instance_counts(pred.detections, classes.size());
        for (std::size_t i = 0; i < c.size(); ++i) t.counts[i] += c[i];
    }
    return t;
}

}  // namespace

void quantify(const QuantifyArgs& a, Streams io) {
    const auto classes = resolve_classes(a.classes, a.pred);
    const auto basis = quantify::parse_basis(a.basis);
    const auto totals = summarize_predictions(a.pred, classes, basis);
    if (totals.report.images == 0) io.err << "warning: no prediction files in " << a.pred.string() << '\n';
    if (totals.report.fell_back_to_box) io.err << "warning: detections without masks; areas use boxes\n";
    std::optional<std::string> deltas;
    if (a.compare) {
        const auto other = summarize_predictions(*a.compare, classes, basis);
        deltas = quantify::format_deltas(quantify::count_deltas(other.counts, totals.counts), classes);
    }
    if (a.json) {
        json j = quantify::to_json(totals.report);
        if (deltas) j["count_deltas"] = *deltas;
        io.out << j.dump(2) << '\n';
    } else {
        io.out << quantify::format_report(totals.report);
        if (deltas) io.out << "count_deltas: " << *deltas << '\n';
    }
    if (a.output) quantify::emit_report(totals.report, *a.output);
}

void serve(const ServeArgs& a, Streams io) {
    std::vector<infer::ModelManifest> manifests;
    for (const auto& p : a.models) {
        if (fs::is_directory(p)) {
            auto dir = infer::load_manifest_dir(p);
            manifests.insert(manifests.end(), dir.begin(), dir.end());
        } else {
            manifests.push_back(infer::load_manifest(p));
        }
    }
    if (manifests.empty()) throw CommandError("no model manifests found");
    std::string spec = a.source;
    if (spec.rfind("synthetic:", 0) == 0 && spec.find("seed=") == std::string::npos) {
        spec += (spec.find('?') == std::string::npos ? "?" : "&") + std::string("seed=") + std::to_string(a.seed);
    }
    auto models = rtserve::ModelRegistry::load(manifests);
    rtserve::ConfigStore config(models);
    rtserve::Pipeline pipeline(rtserve::make_source(spec), models, config);
    rtserve::ServerOptions options;
    options.address = a.address;
    options.port = static_cast<unsigned short>(a.port);
    options.snapshot_dir = a.snapshots;
    rtserve::Server server(options, pipeline, config, models);
    server.start();
    pipeline.start();
    io.out << "listening on http://" << a.address << ':' << server.port() << '\n' << std::flush;

    g_interrupted = false;
    const auto old_int = std::signal(SIGINT, on_signal);
    const auto old_term = std::signal(SIGTERM, on_signal);
    const auto start = rtserve::Clock::now();
    while (!g_interrupted) {
        if (a.duration > 0 && std::chrono::duration<double>(rtserve::Clock::now() - start).count() >= a.duration) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    std::signal(SIGINT, old_int);
    std::signal(SIGTERM, old_term);
    pipeline.stop();
    server.stop();
    io.out << rtserve::to_json(pipeline.stats()).dump() << '\n';
    if (!pipeline.error().empty()) throw CommandError("pipeline failed: " + pipeline.error());
}

void bench(const BenchArgs& a, Streams io) {
    infer::ModelManifest manifest;
    if (a.engine == "stub") {
        manifest = infer::StubEngine::make_manifest(core::ClassSet({"thin", "thick", "bulk"}));
        std::ostringstream path;
        path << "stub:scene@" << a.latency_ms;
        manifest.model_path = path.str();
    } else {
        manifest = infer::load_manifest(a.engine);
    }
    std::string spec = a.source;
    if (spec.rfind("synthetic:", 0) == 0 && spec.find("seed=") == std::string::npos) {
        spec += (spec.find('?') == std::string::npos ? "?" : "&") + std::string("seed=") + std::to_string(a.seed);
    }
    auto models = rtserve::ModelRegistry::load({manifest});
    rtserve::ConfigStore config(models);
    rtserve::PipelineOptions options;
    options.annotate = a.annotate;
    rtserve::Pipeline pipeline(rtserve::make_source(spec), models, config, options);
    pipeline.add_sink(std::make_shared<NullSink>());
    const long rss_before = peak_rss_kb();
    const auto start = rtserve::Clock::now();
    pipeline.start();
    while (pipeline.running() &&
           std::chrono::duration<double>(rtserve::Clock::now() - start).count() < a.seconds) {
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    pipeline.stop();
    const double elapsed = std::chrono::duration<double>(rtserve::Clock::now() - start).count();
    const auto stats = pipeline.stats();
    json j = rtserve::to_json(stats);
    j["engine"] = manifest.model_path;
    j["source"] = spec;
    j["seconds"] = elapsed;
    j["mean_fps"] = static_cast<double>(stats.processed) / elapsed;
    j["conserved"] = pipeline.conserved();
    j["peak_rss_kb"] = peak_rss_kb();
    j["peak_rss_growth_kb"] = peak_rss_kb() - rss_before;
    io.out << j.dump(2) << '\n';
    if (!pipeline.error().empty()) throw CommandError("pipeline failed: " + pipeline.error());
}

}  // namespace flakelens::cli

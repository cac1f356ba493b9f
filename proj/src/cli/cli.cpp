// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/cli/cli.hpp"

#include <CLI11.hpp>

#include "commands.hpp"
#include "json_config.hpp"

namespace flakelens::cli {

namespace {

/// Owns the parsed values; commands read them after parsing.
struct Args {
    TileArgs tile;
    SplitArgs split;
    AugmentArgs augment;
    InferArgs infer;
    EvalArgs eval;
    RobustArgs robust;
    QuantifyArgs quantify;
    ServeArgs serve;
    BenchArgs bench;
};

void add_thresholds(CLI::App* cmd, std::optional<double>& conf, std::optional<double>& iou) {
    cmd->add_option("--conf", conf, "Confidence threshold (default: manifest)")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--iou", iou, "NMS IoU threshold (default: manifest)")->check(CLI::Range(0.0, 1.0));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Characterize 2D-material micrographs with exported detection models", "flakelens"};
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON file of flag values; nested objects apply to subcommands");
    app.require_subcommand(1);
    app.set_version_flag("--version", "flakelens 0.1.0");
    app.failure_message(CLI::FailureMessage::help);

    Args a;

    auto* dataset = app.add_subcommand("dataset", "Prepare labeled datasets (images/ + labels/ + classes.txt)");
    dataset->require_subcommand(1);

    auto* tile = dataset->add_subcommand("tile", "Cut images and labels into square tiles");
    tile->add_option("input", a.tile.input, "Source dataset root")->required();
    tile->add_option("-o,--out", a.tile.output, "Destination dataset root")->required();
    tile->add_option("--tile", a.tile.tile, "Tile side in pixels")->capture_default_str()->check(CLI::PositiveNumber);
    tile->add_option("--overlap", a.tile.overlap, "Overlap between tiles in pixels")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);

    auto* split = dataset->add_subcommand("split", "Write a grouped train/val split manifest (split.json)");
    split->add_option("root", a.split.root, "Dataset root")->required();
    split->add_option("--ratio", a.split.ratio, "Train fraction")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    split->add_option("--seed", a.split.seed, "Shuffle seed")->capture_default_str();

    auto* augment = dataset->add_subcommand("augment", "Write originals plus one augmented copy per op");
    augment->add_option("input", a.augment.input, "Source dataset root")->required();
    augment->add_option("-o,--out", a.augment.output, "Destination dataset root")->required();
    augment->add_option("--op", a.augment.ops, "Augmentation op, repeatable (hflip, vflip, rot90, rot180, rot270, "
                                               "brightness[:a], contrast[:a], noise[:s])")
        ->required();
    augment->add_option("--seed", a.augment.seed, "Seed for photometric ops")->capture_default_str();

    auto* infer_cmd = app.add_subcommand("infer", "Detect on an image or a directory of images");
    infer_cmd->add_option("input", a.infer.input, "Image file or directory")->required();
    infer_cmd->add_option("-m,--model", a.infer.model, "Model manifest")->required()->check(CLI::ExistingFile);
    infer_cmd->add_option("-o,--out", a.infer.output, "Directory for <image>.json prediction files");
    infer_cmd->add_option("--annotated", a.infer.annotated, "Directory for annotated PNGs");
    add_thresholds(infer_cmd, a.infer.confidence, a.infer.iou);
    infer_cmd->add_flag("--class-agnostic", a.infer.class_agnostic, "Suppress overlaps across classes in NMS");
    infer_cmd->add_flag("--no-masks", a.infer.no_masks, "Skip mask composition");

    auto* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth (AP, mAP, confusion)");
    eval_cmd->add_option("--pred", a.eval.pred, "Directory of prediction JSON files")->required();
    eval_cmd->add_option("--gt", a.eval.gt, "Ground-truth directory (labels/ or label files, classes.txt)")->required();
    eval_cmd->add_option("--classes", a.eval.classes, "Class list file (default: <gt>/classes.txt)");
    eval_cmd->add_option("--geometry", a.eval.geometry, "IoU geometry")
        ->capture_default_str()
        ->check(CLI::IsMember({"box", "mask"}));
    eval_cmd->add_option("--range-end", a.eval.range_end, "Upper IoU percent of the averaged range")
        ->capture_default_str()
        ->check(CLI::IsMember({90, 95}));
    eval_cmd->add_option("--confusion-iou", a.eval.confusion_iou, "IoU threshold for the confusion matrix")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    eval_cmd->add_option("--confusion-conf", a.eval.confusion_conf, "Confidence threshold for the confusion matrix")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    eval_cmd->add_option("-o,--out", a.eval.output, "Write the report as JSON to this file");
    eval_cmd->add_flag("--json", a.eval.json, "Print JSON instead of text");

    auto* robust_cmd = app.add_subcommand("robust", "Run the perturbation battery and write a stability CSV");
    robust_cmd->add_option("-m,--model", a.robust.model, "Model manifest")->required()->check(CLI::ExistingFile);
    robust_cmd->add_option("--images", a.robust.images, "Directory of images")->required();
    robust_cmd->add_option("-o,--out", a.robust.output, "CSV path; metadata goes to <out>.meta.json")
        ->capture_default_str();
    robust_cmd->add_option("--perturb", a.robust.perturbations,
                           "Perturbation, repeatable (gaussian[:s], salt_pepper[:f[:r]], brightness:f, downscale:d); "
                           "default: the standard battery");
    robust_cmd->add_option("--seed", a.robust.seed, "Noise seed")->capture_default_str();
    add_thresholds(robust_cmd, a.robust.confidence, a.robust.iou);

    auto* quantify_cmd = app.add_subcommand("quantify", "Per-class area fractions and counts from predictions");
    quantify_cmd->add_option("--pred", a.quantify.pred, "Directory of prediction JSON files")->required();
    quantify_cmd->add_option("--classes", a.quantify.classes, "Class list file (default: <pred>/classes.txt)");
    quantify_cmd->add_option("--basis", a.quantify.basis, "Area basis")
        ->capture_default_str()
        ->check(CLI::IsMember({"mask", "box"}));
    quantify_cmd->add_option("--compare", a.quantify.compare,
                             "Second prediction directory; prints per-class count deltas (pred - compare)");
    quantify_cmd->add_option("-o,--out", a.quantify.output, "Write the report to this file (.json for JSON)");
    quantify_cmd->add_flag("--json", a.quantify.json, "Print JSON instead of text");

    auto* serve_cmd = app.add_subcommand("serve", "Run the live pipeline behind HTTP/WebSocket endpoints");
    serve_cmd->add_option("--source", a.serve.source,
                          "dir:<path>@<fps> or synthetic:<preset>[@fps][?frames=N&size=WxH&seed=S]")
        ->required();
    serve_cmd->add_option("-m,--model", a.serve.models, "Manifest file or directory, repeatable; first is active")
        ->required()
        ->check(CLI::ExistingPath);
    serve_cmd->add_option("--address", a.serve.address, "Bind address")->capture_default_str();
    serve_cmd->add_option("--port", a.serve.port, "Port (0 picks a free one)")
        ->capture_default_str()
        ->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--snapshots", a.serve.snapshots, "Snapshot directory")->capture_default_str();
    serve_cmd->add_option("--duration", a.serve.duration, "Stop after this many seconds (0: until interrupted)")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    serve_cmd->add_option("--seed", a.serve.seed, "Seed for synthetic sources without one")->capture_default_str();

    auto* bench_cmd = app.add_subcommand("bench", "Measure pipeline throughput and print PipelineStats");
    bench_cmd->add_option("--engine", a.bench.engine, "stub, or a model manifest")->capture_default_str();
    bench_cmd->add_option("--latency-ms", a.bench.latency_ms, "Stub engine latency")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    bench_cmd->add_option("--source", a.bench.source, "Frame source specification")->capture_default_str();
    bench_cmd->add_option("--seconds", a.bench.seconds, "Run time")->capture_default_str()->check(CLI::PositiveNumber);
    bench_cmd->add_option("--seed", a.bench.seed, "Seed for synthetic sources without one")->capture_default_str();
    bench_cmd->add_flag("!--no-annotate", a.bench.annotate, "Skip drawing overlays");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    const Streams io{out, err};
    try {
        if (*tile) {
            dataset_tile(a.tile, io);
        } else if (*split) {
            dataset_split(a.split, io);
        } else if (*augment) {
            dataset_augment(a.augment, io);
        } else if (*infer_cmd) {
            infer(a.infer, io);
        } else if (*eval_cmd) {
            eval(a.eval, io);
        } else if (*robust_cmd) {
            robust(a.robust, io);
        } else if (*quantify_cmd) {
            quantify(a.quantify, io);
        } else if (*serve_cmd) {
            serve(a.serve, io);
        } else if (*bench_cmd) {
            bench(a.bench, io);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kOperationalError;
    }
    return kOk;
}

}  // namespace flakelens::cli

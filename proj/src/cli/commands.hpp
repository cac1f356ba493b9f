// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace flakelens::cli {

/// Operational failure with a message for standard error.
class CommandError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

struct TileArgs {
    std::filesystem::path input, output;
    int tile = 640;
    int overlap = 0;
};
void dataset_tile(const TileArgs& a, Streams io);

struct SplitArgs {
    std::filesystem::path root;
    double ratio = 0.8;
    std::uint64_t seed = 0;
};
void dataset_split(const SplitArgs& a, Streams io);

struct AugmentArgs {
    std::filesystem::path input, output;
    std::vector<std::string> ops;
    std::uint64_t seed = 0;
};
void dataset_augment(const AugmentArgs& a, Streams io);

struct InferArgs {
    std::filesystem::path input;
    std::filesystem::path model;
    std::optional<std::filesystem::path> output;
    std::optional<std::filesystem::path> annotated;
    std::optional<double> confidence, iou;
    bool class_agnostic = false;
    bool no_masks = false;
};
void infer(const InferArgs& a, Streams io);

struct EvalArgs {
    std::filesystem::path pred, gt;
    std::optional<std::filesystem::path> classes;
    std::string geometry = "box";
    int range_end = 90;
    double confusion_iou = 0.5;
    double confusion_conf = 0.25;
    std::optional<std::filesystem::path> output;
    bool json = false;
};
void eval(const EvalArgs& a, Streams io);

struct RobustArgs {
    std::filesystem::path model, images;
    std::filesystem::path output = "robust.csv";
    std::vector<std::string> perturbations;
    std::uint64_t seed = 0;
    std::optional<double> confidence, iou;
};
void robust(const RobustArgs& a, Streams io);

struct QuantifyArgs {
    std::filesystem::path pred;
    std::optional<std::filesystem::path> classes;
    std::optional<std::filesystem::path> compare;
    std::string basis = "mask";
    std::optional<std::filesystem::path> output;
    bool json = false;
};
void quantify(const QuantifyArgs& a, Streams io);

struct ServeArgs {
    std::string source;
    std::vector<std::filesystem::path> models;
    std::string address = "127.0.0.1";
    int port = 8080;
    std::filesystem::path snapshots = "snapshots";
    double duration = 0.0;
    std::uint64_t seed = 1;
};
void serve(const ServeArgs& a, Streams io);

struct BenchArgs {
    std::string engine = "stub";
    double latency_ms = 10.0;
    std::string source = "synthetic:flakes@100";
    double seconds = 10.0;
    std::uint64_t seed = 1;
    bool annotate = true;
};
void bench(const BenchArgs& a, Streams io);

}  // namespace flakelens::cli

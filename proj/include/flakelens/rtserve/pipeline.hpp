// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "flakelens/core/image.hpp"
#include "flakelens/core/instance.hpp"
#include "flakelens/rtserve/fps_meter.hpp"
#include "flakelens/rtserve/frame_source.hpp"
#include "flakelens/rtserve/live_config.hpp"

namespace flakelens::rtserve {

struct FrameTimings {
    double perturb_ms = 0.0;
    double preprocess_ms = 0.0;
    double inference_ms = 0.0;
    double postprocess_ms = 0.0;
    double annotate_ms = 0.0;
    /// Capture to publish.
    double latency_ms = 0.0;
};

struct PublishedFrame {
    std::uint64_t frame_id = 0;
    std::int64_t captured_at = 0;
    std::int64_t published_at = 0;
    std::uint64_t config_version = 0;
    std::string model_id;
    int width = 0;
    int height = 0;
    std::vector<core::Detection> detections;
    FrameTimings timings;
    std::shared_ptr<const core::ClassSet> classes;
    std::shared_ptr<const core::ImageBuffer> annotated;
};

/// JSON message for one published frame. Masks are omitted unless asked for.
nlohmann::json frame_message(const PublishedFrame& f, bool include_masks = false);

/// Receives every published frame in frame_id order. A sink that throws is detached.
class FrameSink {
public:
    virtual ~FrameSink() = default;
    virtual void on_frame(const PublishedFrame& frame) = 0;
};

struct PipelineOptions {
    /// Frames waiting between inference and publishing before inference blocks.
    std::size_t publish_queue = 2;
    /// Skip drawing when no sink needs pixels.
    bool annotate = true;
};

/// capture -> latest-wins slot -> [perturb, detect] -> annotate -> sinks.
/// Three threads: capture, inference worker, publisher.
class Pipeline {
public:
    Pipeline(std::unique_ptr<FrameSource> source, const ModelRegistry& models, ConfigStore& config,
             PipelineOptions options = {});
    ~Pipeline();
    Pipeline(const Pipeline&) = delete;
    Pipeline& operator=(const Pipeline&) = delete;

    void add_sink(std::shared_ptr<FrameSink> sink);
    void remove_sink(const std::shared_ptr<FrameSink>& sink);
    std::size_t sink_count() const;

    /// Throws std::logic_error when already started or without sinks.
    void start();
    /// Cooperative and idempotent; returns once every thread has finished.
    void stop();
    /// Blocks until the source ends (or stop()); stats are final afterwards.
    void wait();
    void run() {
        start();
        wait();
    }

    bool running() const noexcept { return running_.load(); }
    PipelineStats stats() const;
    /// processed + dropped == consumed; meaningful once finished.
    bool conserved() const;
    /// Empty unless the engine failed.
    std::string error() const;

private:
    struct Work;
    void capture_loop(std::stop_token stop);
    void worker_loop(std::stop_token stop);
    void publish_loop();
    void finish();

    std::unique_ptr<FrameSource> source_;
    const ModelRegistry& models_;
    ConfigStore& config_;
    PipelineOptions options_;

    mutable std::mutex sinks_mutex_;
    std::vector<std::shared_ptr<FrameSink>> sinks_;

    mutable std::mutex stats_mutex_;
    FpsMeter meter_;
    PipelineStats stats_;
    std::string error_;

    std::atomic<bool> running_{false};
    std::atomic<bool> started_{false};
    std::atomic<std::uint64_t> consumed_{0}, dropped_{0}, processed_{0};

    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::mutex lifecycle_mutex_;
    bool joined_ = false;
};

}  // namespace flakelens::rtserve

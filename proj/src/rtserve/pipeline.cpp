// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/rtserve/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

#include "flakelens/infer/records.hpp"
#include "flakelens/rtserve/annotate.hpp"
#include "flakelens/rtserve/handoff.hpp"

namespace flakelens::rtserve {

using nlohmann::json;

namespace {

double ms_since(std::int64_t start_ns) { return static_cast<double>(now_ns() - start_ns) / 1e6; }

}  // namespace

json frame_message(const PublishedFrame& f, bool include_masks) {
    json dets = json::array();
    json counts = json::object();
    if (f.classes) {
        for (const auto& n : f.classes->names()) counts[n] = 0;
    }
    for (const auto& d : f.detections) {
        if (f.classes) {
            dets.push_back(infer::detection_record(d, *f.classes, include_masks));
            if (f.classes->contains(d.class_id)) counts[f.classes->name(d.class_id)] = counts[f.classes->name(d.class_id)].get<int>() + 1;
        }
    }
    return {{"frame_id", f.frame_id},
            {"captured_at", f.captured_at},
            {"published_at", f.published_at},
            {"config_version", f.config_version},
            {"model_id", f.model_id},
            {"width", f.width},
            {"height", f.height},
            {"timings",
             {{"perturb_ms", f.timings.perturb_ms},
              {"preprocess_ms", f.timings.preprocess_ms},
              {"inference_ms", f.timings.inference_ms},
              {"postprocess_ms", f.timings.postprocess_ms},
              {"annotate_ms", f.timings.annotate_ms},
              {"latency_ms", f.timings.latency_ms}}},
            {"counts", counts},
            {"detections", dets}};
}

struct Pipeline::Work {
    PublishedFrame frame;
    std::shared_ptr<const LiveConfig> config;
    std::shared_ptr<const core::ImageBuffer> image;
};

struct Pipeline::Impl {
    explicit Impl(std::size_t queue) : published(queue) {}
    LatestSlot<FramePacket> slot;
    BoundedQueue<Work> published;
    std::stop_source stop;
    std::thread capture, worker, publisher;
};

Pipeline::Pipeline(std::unique_ptr<FrameSource> source, const ModelRegistry& models, ConfigStore& config,
                   PipelineOptions options)
    : source_(std::move(source)), models_(models), config_(config), options_(options) {
    if (!source_) throw std::invalid_argument("pipeline needs a frame source");
    if (options_.publish_queue == 0) throw std::invalid_argument("publish queue must hold at least one frame");
}

Pipeline::~Pipeline() { stop(); }

void Pipeline::add_sink(std::shared_ptr<FrameSink> sink) {
    std::lock_guard lock(sinks_mutex_);
    sinks_.push_back(std::move(sink));
}

void Pipeline::remove_sink(const std::shared_ptr<FrameSink>& sink) {
    std::lock_guard lock(sinks_mutex_);
    std::erase(sinks_, sink);
}

std::size_t Pipeline::sink_count() const {
    std::lock_guard lock(sinks_mutex_);
    return sinks_.size();
}

void Pipeline::start() {
    if (sink_count() == 0) throw std::logic_error("pipeline needs at least one sink");
    if (started_.exchange(true)) throw std::logic_error("pipeline already started");
    impl_ = std::make_unique<Impl>(options_.publish_queue);
    {
        std::lock_guard lock(stats_mutex_);
        stats_.status = "running";
        stats_.config_version = config_.current()->version;
    }
    running_ = true;
    const std::stop_token token = impl_->stop.get_token();
    impl_->publisher = std::thread([this] { publish_loop(); });
    impl_->worker = std::thread([this, token] { worker_loop(token); });
    impl_->capture = std::thread([this, token] { capture_loop(token); });
}

void Pipeline::capture_loop(std::stop_token stop) {
    try {
        while (auto pkt = source_->next(stop)) {
            ++consumed_;
            if (impl_->slot.put(std::move(*pkt))) ++dropped_;
        }
    } catch (const std::exception& e) {
        std::lock_guard lock(stats_mutex_);
        error_ = std::string("source failed: ") + e.what();
        impl_->stop.request_stop();
    }
    impl_->slot.close();
}

void Pipeline::worker_loop(std::stop_token stop) {
    while (auto pkt = impl_->slot.take(stop)) {
        const auto cfg = config_.current();
        const ModelRegistry::Entry* entry = models_.find(cfg->model_id);
        Work w;
        w.config = cfg;
        w.frame.frame_id = pkt->frame_id;
        w.frame.captured_at = pkt->captured_at;
        w.frame.config_version = cfg->version;
        w.frame.model_id = cfg->model_id;
        try {
            if (!entry) throw std::runtime_error("model '" + cfg->model_id + "' is not loaded");
            const std::int64_t t0 = now_ns();
            if (cfg->perturbation) {
                w.image = std::make_shared<const core::ImageBuffer>(robust::apply(pkt->image, *cfg->perturbation));
            } else {
                w.image = std::make_shared<const core::ImageBuffer>(std::move(pkt->image));
            }
            w.frame.timings.perturb_ms = cfg->perturbation ? ms_since(t0) : 0.0;

            infer::DetectOptions opts;
            opts.confidence = cfg->confidence;
            opts.iou = cfg->iou;
            opts.enabled_classes = cfg->enabled_classes;
            const infer::DetectionResult r = entry->detector->detect(*w.image, opts);
            w.frame.detections = r.detections;
            w.frame.timings.preprocess_ms = r.timings.preprocess_ms;
            w.frame.timings.inference_ms = r.timings.inference_ms;
            w.frame.timings.postprocess_ms = r.timings.postprocess_ms;
            w.frame.width = w.image->width();
            w.frame.height = w.image->height();
            w.frame.classes = std::make_shared<const core::ClassSet>(entry->manifest.class_set);
        } catch (const std::exception& e) {
            ++dropped_;
            std::lock_guard lock(stats_mutex_);
            error_ = std::string("inference failed: ") + e.what();
            impl_->stop.request_stop();
            break;
        }
        impl_->published.push(std::move(w));
    }
    impl_->published.close();
}

void Pipeline::publish_loop() {
    while (auto w = impl_->published.pop()) {
        PublishedFrame& f = w->frame;
        const std::int64_t t0 = now_ns();
        if (options_.annotate) {
            f.annotated = std::make_shared<const core::ImageBuffer>(
                annotate_frame(*w->image, f.detections, w->config->overlay, *f.classes));
        } else {
            f.annotated = w->image;
        }
        f.timings.annotate_ms = ms_since(t0);
        f.published_at = now_ns();
        f.timings.latency_ms = static_cast<double>(f.published_at - f.captured_at) / 1e6;
        {
            std::lock_guard lock(stats_mutex_);
            meter_.record(f.published_at, f.timings.latency_ms);
            stats_.last_frame_id = f.frame_id;
            stats_.config_version = f.config_version;
        }
        ++processed_;

        std::vector<std::shared_ptr<FrameSink>> sinks;
        {
            std::lock_guard lock(sinks_mutex_);
            sinks = sinks_;
        }
        for (const auto& s : sinks) {
            try {
                s->on_frame(f);
            } catch (const std::exception&) {
                remove_sink(s);
            }
        }
    }
}

void Pipeline::stop() {
    if (impl_) impl_->stop.request_stop();
    finish();
}

void Pipeline::wait() { finish(); }

void Pipeline::finish() {
    std::lock_guard lifecycle(lifecycle_mutex_);
    if (!impl_ || joined_) return;
    impl_->capture.join();
    impl_->worker.join();
    impl_->publisher.join();
    // A frame still waiting when stop arrived was never processed.
    if (impl_->slot.drain()) ++dropped_;
    joined_ = true;
    running_ = false;
    std::lock_guard lock(stats_mutex_);
    if (!error_.empty()) {
        stats_.status = "failed";
    } else {
        stats_.status = impl_->stop.stop_requested() ? "stopped" : "finished";
    }
}

PipelineStats Pipeline::stats() const {
    std::lock_guard lock(stats_mutex_);
    PipelineStats s = stats_;
    const auto snap = meter_.snapshot(now_ns());
    s.fps = snap.fps;
    s.latency_p50 = snap.latency_p50;
    s.latency_p95 = snap.latency_p95;
    s.processed = processed_.load();
    s.dropped = dropped_.load();
    s.consumed = consumed_.load();
    return s;
}

bool Pipeline::conserved() const { return processed_.load() + dropped_.load() == consumed_.load(); }

std::string Pipeline::error() const {
    std::lock_guard lock(stats_mutex_);
    return error_;
}

}  // namespace flakelens::rtserve

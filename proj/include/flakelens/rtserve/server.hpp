// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "flakelens/rtserve/pipeline.hpp"

namespace flakelens::rtserve {

struct ServerOptions {
    std::string address = "127.0.0.1";
    /// 0 picks a free port; see Server::port().
    unsigned short port = 8080;
    std::filesystem::path snapshot_dir = "snapshots";
    int jpeg_quality = 80;
};

/// HTTP/1.1 + WebSocket control surface over one pipeline:
///   GET  /stream       multipart/x-mixed-replace MJPEG of annotated frames
///   WS   /detections   one JSON text message per published frame
///   GET  /stats        PipelineStats plus the latest frame's morphology
///   GET  /config       current LiveConfig
///   PUT  /config       partial update; 422 with field errors when invalid
///   POST /snapshot     writes <frame_id>.jpg and <frame_id>.json
///   GET  /models       loaded manifests
/// Registers its frame sink on construction, so build it before starting the pipeline.
class Server {
public:
    Server(ServerOptions options, Pipeline& pipeline, ConfigStore& config, const ModelRegistry& models);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds and starts accepting. Throws std::runtime_error when binding fails.
    void start();
    /// Closes the listener and every open connection; idempotent.
    void stop();
    unsigned short port() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace flakelens::rtserve

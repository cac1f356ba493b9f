// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include <json.hpp>

namespace flakelens::rtserve {

struct PipelineStats {
    double fps = 0.0;
    double latency_p50 = 0.0;
    double latency_p95 = 0.0;
    std::uint64_t dropped = 0;
    std::uint64_t processed = 0;
    std::uint64_t consumed = 0;
    std::uint64_t last_frame_id = 0;
    std::uint64_t config_version = 0;
    std::string status = "idle";
};

nlohmann::json to_json(const PipelineStats& s);

/// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value (1-based).
double nearest_rank(std::vector<double> values, double percentile);

/// Publish events in a trailing 1 s window.
class FpsMeter {
public:
    explicit FpsMeter(std::int64_t window_ns = 1'000'000'000) : window_ns_(window_ns) {}

    /// Timestamps must not decrease.
    void record(std::int64_t published_at_ns, double latency_ms);

    /// Publishes in (now - window, now], with latency percentiles over them.
    struct Snapshot {
        double fps = 0.0;
        double latency_p50 = 0.0;
        double latency_p95 = 0.0;
        std::size_t count = 0;
    };
    Snapshot snapshot(std::int64_t now_ns) const;

private:
    struct Event {
        std::int64_t at;
        double latency_ms;
    };
    std::int64_t window_ns_;
    std::deque<Event> events_;
};

}  // namespace flakelens::rtserve

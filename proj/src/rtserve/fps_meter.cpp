// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/rtserve/fps_meter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flakelens::rtserve {

nlohmann::json to_json(const PipelineStats& s) {
    return {{"fps", s.fps},
            {"latency_p50", s.latency_p50},
            {"latency_p95", s.latency_p95},
            {"dropped", s.dropped},
            {"processed", s.processed},
            {"consumed", s.consumed},
            {"last_frame_id", s.last_frame_id},
            {"config_version", s.config_version},
            {"status", s.status}};
}

double nearest_rank(std::vector<double> values, double percentile) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

void FpsMeter::record(std::int64_t published_at_ns, double latency_ms) {
    if (!events_.empty() && published_at_ns < events_.back().at) {
        throw std::invalid_argument("publish timestamps must not decrease");
    }
    events_.push_back({published_at_ns, latency_ms});
    // Keep only what any future window could still see.
    while (!events_.empty() && events_.front().at <= published_at_ns - window_ns_) events_.pop_front();
}

FpsMeter::Snapshot FpsMeter::snapshot(std::int64_t now_ns) const {
    Snapshot s;
    std::vector<double> lat;
    for (const auto& e : events_) {
        if (e.at > now_ns - window_ns_ && e.at <= now_ns) lat.push_back(e.latency_ms);
    }
    s.count = lat.size();
    s.fps = static_cast<double>(s.count) * 1e9 / static_cast<double>(window_ns_);
    s.latency_p50 = nearest_rank(lat, 50);
    s.latency_p95 = nearest_rank(lat, 95);
    return s;
}

}  // namespace flakelens::rtserve

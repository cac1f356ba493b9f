// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "flakelens/core/image.hpp"

namespace flakelens::rtserve {

using Clock = std::chrono::steady_clock;

/// Nanoseconds on the steady clock.
inline std::int64_t now_ns() noexcept {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now().time_since_epoch()).count();
}

struct FramePacket {
    std::uint64_t frame_id = 0;
    std::int64_t captured_at = 0;
    core::ImageBuffer image;
};

class SourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Yields frames in capture order, paced to the source rate. next() returns
/// nullopt once exhausted or when `stop` is requested while waiting.
class FrameSource {
public:
    virtual ~FrameSource() = default;
    virtual std::optional<FramePacket> next(std::stop_token stop) = 0;
    virtual std::string describe() const = 0;
};

/// Shared pacing and frame numbering; frame ids start at 1.
class PacedSource : public FrameSource {
public:
    /// fps <= 0 delivers frames as fast as they are requested.
    explicit PacedSource(double fps);
    std::optional<FramePacket> next(std::stop_token stop) final;
    double fps() const noexcept { return fps_; }

protected:
    /// Produces frame `index` (0-based) or nullopt at the end.
    virtual std::optional<core::ImageBuffer> produce(std::uint64_t index) = 0;

private:
    double fps_;
    std::uint64_t index_ = 0;
    std::optional<Clock::time_point> start_;
    bool exhausted_ = false;
};

/// Image files of a directory in name order, once.
class DirectorySource : public PacedSource {
public:
    /// Throws SourceError when the directory is missing.
    DirectorySource(std::filesystem::path dir, double fps);
    std::string describe() const override;
    std::size_t size() const noexcept { return files_.size(); }

protected:
    std::optional<core::ImageBuffer> produce(std::uint64_t index) override;

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> files_;
};

struct SyntheticOptions {
    /// "flakes" (moving polygons on a gradient), "gray" or "noise".
    std::string preset = "flakes";
    double fps = 30.0;
    /// 0 means endless.
    std::uint64_t frames = 0;
    int width = 1280;
    int height = 720;
    std::uint64_t seed = 1;
};

/// Procedural frames. A ring of pre-rendered frames keeps per-frame cost to a copy.
class SyntheticSource : public PacedSource {
public:
    explicit SyntheticSource(SyntheticOptions options);
    std::string describe() const override;

protected:
    std::optional<core::ImageBuffer> produce(std::uint64_t index) override;

private:
    SyntheticOptions options_;
    std::vector<core::ImageBuffer> ring_;
};

/// Parses a source specification:
///   dir:<path>@<fps>
///   synthetic:<preset>[@<fps>][?frames=N&size=WxH&seed=S]
///   screen:<x,y,w,h>   (rejected: no screen capture backend in this build)
/// Throws SourceError on malformed or unavailable sources.
std::unique_ptr<FrameSource> make_source(std::string_view spec);

}  // namespace flakelens::rtserve

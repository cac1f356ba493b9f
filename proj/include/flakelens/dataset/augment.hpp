// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flakelens/core/image.hpp"
#include "flakelens/core/instance.hpp"
#include "flakelens/dataset/tiling.hpp"

namespace flakelens::dataset {

struct LabeledExample {
    core::ImageBuffer image;
    std::vector<core::Instance> instances;
    std::string source_id;
    TileOffset offset;
};

enum class AugmentKind { hflip, vflip, rot90, rot180, rot270, brightness, contrast, noise };

/// `amount` is the jitter bound for brightness/contrast (at most 0.2) and the
/// noise sigma as a fraction of 255 (at most 0.1). Geometric ops ignore it.
struct AugmentOp {
    AugmentKind kind = AugmentKind::hflip;
    double amount = 0.0;
};

/// Accepts "hflip", "rot90", "brightness", "brightness:0.1", "noise:0.05", ...
/// Throws std::invalid_argument for unknown names or out-of-range amounts.
AugmentOp parse_augment_op(std::string_view text);
std::string to_string(const AugmentOp& op);

/// Applies each op independently to `example`, returning one result per op.
/// Rotations are clockwise. Deterministic under `seed`.
std::vector<LabeledExample> augment(const LabeledExample& example, std::span<const AugmentOp> ops,
                                    std::uint64_t seed);

/// Label transform matching the pixel transform of a geometric op. Flips
/// reverse polygon vertex order so winding is preserved.
core::Instance transform_instance(const core::Instance& inst, AugmentKind kind);
core::ImageBuffer transform_image(const core::ImageBuffer& img, AugmentKind kind);
bool is_geometric(AugmentKind kind) noexcept;

}  // namespace flakelens::dataset

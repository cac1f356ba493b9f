// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/core/instance.hpp"

namespace flakelens::core {

Instance Instance::from_polygon(int class_id, PolygonMask poly) {
    Instance inst;
    inst.class_id = class_id;
    inst.box = poly.bounding_box();
    inst.mask = std::move(poly);
    return inst;
}

}  // namespace flakelens::core

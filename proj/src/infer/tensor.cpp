// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/infer/tensor.hpp"

#include "flakelens/infer/errors.hpp"

namespace flakelens::infer {

std::int64_t element_count(const Shape& shape) noexcept {
    std::int64_t n = 1;
    for (auto d : shape) {
        n *= d;
    }
    return n;
}

std::string shape_string(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) {
            s += ", ";
        }
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

const Tensor& RawOutputs::at(const std::string& name) const {
    const auto it = tensors.find(name);
    if (it == tensors.end()) {
        throw LayoutError(name, "missing from model outputs");
    }
    return it->second;
}

}  // namespace flakelens::infer

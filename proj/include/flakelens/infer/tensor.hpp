// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace flakelens::infer {

using Shape = std::vector<std::int64_t>;

std::int64_t element_count(const Shape& shape) noexcept;
std::string shape_string(const Shape& shape);

/// Dense row-major float tensor.
struct Tensor {
    Shape shape;
    std::vector<float> values;

    Tensor() = default;
    explicit Tensor(Shape s) : shape(std::move(s)), values(static_cast<std::size_t>(element_count(shape)), 0.0f) {}
    Tensor(Shape s, std::vector<float> v) : shape(std::move(s)), values(std::move(v)) {}
};

/// Named model outputs, shape-checked against the manifest layout.
struct RawOutputs {
    std::map<std::string, Tensor> tensors;

    /// Throws LayoutError when the tensor is absent.
    const Tensor& at(const std::string& name) const;
};

}  // namespace flakelens::infer

// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

// Internal representation used by the ONNX interpreter.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flakelens/infer/errors.hpp"
#include "flakelens/infer/tensor.hpp"

namespace flakelens::infer::onnx_rt {

enum class DType { f32, i64 };

struct Value {
    DType type = DType::f32;
    Shape shape;
    std::vector<float> f;
    std::vector<std::int64_t> i;

    static Value floats(Shape s, std::vector<float> v) {
        Value out;
        out.type = DType::f32;
        out.shape = std::move(s);
        out.f = std::move(v);
        return out;
    }
    static Value ints(Shape s, std::vector<std::int64_t> v) {
        Value out;
        out.type = DType::i64;
        out.shape = std::move(s);
        out.i = std::move(v);
        return out;
    }
    std::int64_t numel() const noexcept { return element_count(shape); }
    std::int64_t rank() const noexcept { return static_cast<std::int64_t>(shape.size()); }
    /// Values as int64 regardless of storage type.
    std::vector<std::int64_t> as_ints() const;
    std::vector<float> as_floats() const;
};

template <class T>
std::vector<T>& storage(Value& v);
template <>
inline std::vector<float>& storage<float>(Value& v) { return v.f; }
template <>
inline std::vector<std::int64_t>& storage<std::int64_t>(Value& v) { return v.i; }
template <class T>
const std::vector<T>& storage(const Value& v) { return storage<T>(const_cast<Value&>(v)); }

/// Calls fn with a tag of the element type (float{} or int64_t{}).
template <class Fn>
decltype(auto) visit_type(DType t, Fn&& fn) {
    if (t == DType::f32) {
        return fn(float{});
    }
    return fn(std::int64_t{});
}

struct Attribute {
    std::optional<std::int64_t> i;
    std::optional<float> f;
    std::optional<std::string> s;
    std::vector<std::int64_t> ints;
    std::vector<float> floats;
    std::optional<Value> tensor;
};

struct Node {
    std::string op_type;
    std::string name;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::map<std::string, Attribute> attributes;
    int opset = 13;

    const Attribute* attr(const std::string& key) const {
        const auto it = attributes.find(key);
        return it == attributes.end() ? nullptr : &it->second;
    }
    std::int64_t attr_int(const std::string& key, std::int64_t fallback) const {
        const Attribute* a = attr(key);
        return a && a->i ? *a->i : fallback;
    }
    float attr_float(const std::string& key, float fallback) const {
        const Attribute* a = attr(key);
        return a && a->f ? *a->f : fallback;
    }
    std::string attr_string(const std::string& key, const std::string& fallback) const {
        const Attribute* a = attr(key);
        return a && a->s ? *a->s : fallback;
    }
    std::vector<std::int64_t> attr_ints(const std::string& key, std::vector<std::int64_t> fallback = {}) const {
        const Attribute* a = attr(key);
        return a ? a->ints : fallback;
    }
    [[noreturn]] void fail(const std::string& message) const;
};

/// Inputs in node order; a missing optional input is nullptr.
using Inputs = std::span<const Value* const>;
using Kernel = std::function<std::vector<Value>(const Node&, Inputs)>;

const std::map<std::string, Kernel>& kernel_registry();

}  // namespace flakelens::infer::onnx_rt

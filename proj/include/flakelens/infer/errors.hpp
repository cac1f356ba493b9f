// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace flakelens::infer {

/// Malformed or inconsistent manifest file.
class ManifestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Model file missing, unreadable, corrupt or using unsupported operators.
class ModelLoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor shapes disagree with the manifest layout.
class LayoutError : public std::runtime_error {
public:
    LayoutError(std::string tensor, const std::string& message)
        : std::runtime_error("tensor '" + tensor + "': " + message), tensor_(std::move(tensor)) {}
    const std::string& tensor() const noexcept { return tensor_; }

private:
    std::string tensor_;
};

/// Failure while executing a model.
class InferenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace flakelens::infer

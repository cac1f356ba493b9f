// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>
#include <stop_token>

namespace flakelens::rtserve {

/// Depth-1 latest-wins buffer: put() replaces a waiting item instead of queueing.
template <typename T>
class LatestSlot {
public:
    /// Returns true when a waiting item was replaced (the caller counts it dropped).
    bool put(T item) {
        bool replaced = false;
        {
            std::lock_guard lock(mutex_);
            replaced = item_.has_value();
            item_ = std::move(item);
        }
        cv_.notify_one();
        return replaced;
    }

    /// Blocks for an item. Returns nullopt after close() once empty, or when
    /// stop is requested (a waiting item stays for drain()).
    std::optional<T> take(std::stop_token stop) {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, stop, [&] { return item_.has_value() || closed_; });
        if (stop.stop_requested() || !item_) return std::nullopt;
        std::optional<T> out = std::move(item_);
        item_.reset();
        return out;
    }

    void close() {
        {
            std::lock_guard lock(mutex_);
            closed_ = true;
        }
        cv_.notify_all();
    }

    std::optional<T> drain() {
        std::lock_guard lock(mutex_);
        std::optional<T> out = std::move(item_);
        item_.reset();
        return out;
    }

private:
    std::mutex mutex_;
    std::condition_variable_any cv_;
    std::optional<T> item_;
    bool closed_ = false;
};

/// Bounded FIFO with blocking push, used where order and completeness matter.
template <typename T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

    void push(T item) {
        std::unique_lock lock(mutex_);
        not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
        items_.push_back(std::move(item));
        not_empty_.notify_one();
    }

    /// nullopt once closed and empty.
    std::optional<T> pop() {
        std::unique_lock lock(mutex_);
        not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
        if (items_.empty()) return std::nullopt;
        T out = std::move(items_.front());
        items_.pop_front();
        not_full_.notify_one();
        return out;
    }

    void close() {
        {
            std::lock_guard lock(mutex_);
            closed_ = true;
        }
        not_empty_.notify_all();
        not_full_.notify_all();
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return items_.size();
    }

private:
    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::condition_variable not_empty_, not_full_;
    std::deque<T> items_;
    bool closed_ = false;
};

}  // namespace flakelens::rtserve

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>

namespace touchless
{
    /// Multi-producer/multi-consumer FIFO with a fixed capacity. push() blocks while full;
    /// push_latest() evicts the oldest entry instead and reports the eviction.
    template <typename T>
    class BoundedQueue
    {
    public:
        explicit BoundedQueue(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

        BoundedQueue(const BoundedQueue &) = delete;
        BoundedQueue &operator=(const BoundedQueue &) = delete;

        // Returns false if the queue was closed.
        bool push(T value)
        {
            std::unique_lock lock(mutex_);
            not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
            if (closed_)
            {
                return false;
            }
            items_.push_back(std::move(value));
            not_empty_.notify_one();
            return true;
        }

        // Returns true if an older entry had to be discarded.
        bool push_latest(T value)
        {
            std::lock_guard lock(mutex_);
            if (closed_)
            {
                return false;
            }
            bool evicted = false;
            if (items_.size() >= capacity_)
            {
                items_.pop_front();
                evicted = true;
            }
            items_.push_back(std::move(value));
            not_empty_.notify_one();
            return evicted;
        }

        // Blocks until an item arrives or the queue is closed and drained.
        std::optional<T> pop()
        {
            std::unique_lock lock(mutex_);
            not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
            return take(lock);
        }

        template <typename Rep, typename Period>
        std::optional<T> pop_for(std::chrono::duration<Rep, Period> timeout)
        {
            std::unique_lock lock(mutex_);
            not_empty_.wait_for(lock, timeout, [&] { return closed_ || !items_.empty(); });
            return take(lock);
        }

        void close()
        {
            std::lock_guard lock(mutex_);
            closed_ = true;
            not_empty_.notify_all();
            not_full_.notify_all();
        }

        bool closed() const
        {
            std::lock_guard lock(mutex_);
            return closed_;
        }

        std::size_t size() const
        {
            std::lock_guard lock(mutex_);
            return items_.size();
        }

    private:
        std::optional<T> take(std::unique_lock<std::mutex> &)
        {
            if (items_.empty())
            {
                return std::nullopt;
            }
            T v = std::move(items_.front());
            items_.pop_front();
            not_full_.notify_one();
            return v;
        }

        std::size_t capacity_;
        mutable std::mutex mutex_;
        std::condition_variable not_empty_;
        std::condition_variable not_full_;
        std::deque<T> items_;
        bool closed_ = false;
    };
}

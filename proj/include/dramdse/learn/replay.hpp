#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "dramdse/error.hpp"

namespace dramdse::learn {

/// Welford running mean/variance.
class RunningStats {
public:
    void push(double x)
    {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    long long count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stddev() const { return std::sqrt(variance()); }

    /// (x - mean) / std, with std floored so early samples stay bounded.
    double standardize(double x, double min_std = 1e-3) const
    {
        if (n_ < 2) return 0.0;
        return (x - mean_) / std::max(stddev(), min_std);
    }

private:
    long long n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Fixed-capacity ring buffer with uniform sampling (with replacement).
template <typename T>
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity)
    {
        if (capacity_ == 0) throw Error(ErrorKind::ConfigError, "replay capacity must be >= 1");
        items_.reserve(std::min<std::size_t>(capacity_, 4096));
    }

    void push(T item)
    {
        if (items_.size() < capacity_)
            items_.push_back(std::move(item));
        else
            items_[head_] = std::move(item);
        head_ = (head_ + 1) % capacity_;
    }

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const T& operator[](std::size_t i) const { return items_[i]; }

    template <typename Rng>
    std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const
    {
        if (items_.empty()) throw Error(ErrorKind::LengthMismatch, "sampling from an empty replay buffer");
        std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
        std::vector<std::size_t> out(n);
        for (auto& i : out) i = pick(rng);
        return out;
    }

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<T> items_;
};

} // namespace dramdse::learn

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "dramdse/error.hpp"

namespace dramdse::learn {

/// Partition of an output vector into independent categorical heads.
class HeadLayout {
public:
    HeadLayout() = default;

    explicit HeadLayout(std::vector<int> cards) : cards_(std::move(cards))
    {
        int off = 0;
        for (int c : cards_) {
            if (c < 1) throw Error(ErrorKind::ShapeMismatch, "categorical head needs at least one category");
            offsets_.push_back(off);
            off += c;
        }
        total_ = off;
    }

    int num_heads() const { return static_cast<int>(cards_.size()); }
    int card(int h) const { return cards_[static_cast<std::size_t>(h)]; }
    int offset(int h) const { return offsets_[static_cast<std::size_t>(h)]; }
    int total() const { return total_; }
    const std::vector<int>& cards() const { return cards_; }

    friend bool operator==(const HeadLayout&, const HeadLayout&) = default;

private:
    std::vector<int> cards_;
    std::vector<int> offsets_;
    int total_ = 0;
};

/// Log-probabilities of one head, computed stably from its logits segment.
template <typename Derived>
Eigen::VectorXd log_softmax(const Eigen::MatrixBase<Derived>& logits)
{
    const double mx = logits.maxCoeff();
    Eigen::VectorXd z = logits.array() - mx;
    const double lse = std::log(z.array().exp().sum());
    return (z.array() - lse).matrix();
}

/// Entropy of a distribution given as log-probabilities.
inline double entropy_from_logp(const Eigen::VectorXd& logp)
{
    return -(logp.array().exp() * logp.array()).sum();
}

/// Index of the largest probability; ties go to the lowest index.
template <typename Derived>
int argmax(const Eigen::MatrixBase<Derived>& v)
{
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
        if (v(i) > v(best)) best = i;
    return best;
}

/// Inverse-CDF sample from log-probabilities using one uniform draw u in [0,1).
inline int sample_from_logp(const Eigen::VectorXd& logp, double u)
{
    double acc = 0.0;
    const int n = static_cast<int>(logp.size());
    for (int i = 0; i < n; ++i) {
        acc += std::exp(logp(i));
        if (u < acc) return i;
    }
    return n - 1;
}

} // namespace dramdse::learn

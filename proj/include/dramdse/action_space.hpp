#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dramdse/config.hpp"
#include "dramdse/error.hpp"

namespace dramdse {

using ActionIndices = std::array<int, kNumParams>;

/// Factored action space: one ordered list of admissible raw values per
/// parameter. The full space expands every grid; restrictions keep a subset
/// of each factor (in grid order).
class ActionSpace {
public:
    static ActionSpace full()
    {
        ActionSpace s;
        for (int i = 0; i < kNumParams; ++i) s.factors_[static_cast<std::size_t>(i)] = param_grid(i);
        return s;
    }

    /// Categoricals free, numerics pinned to their minima (432 configs).
    static ActionSpace categorical_only()
    {
        auto s = full();
        for (int i = 0; i < kNumParams; ++i)
            if (is_numeric_param(i)) s.restrict(i, {param_grid(i).front()});
        return s;
    }

    /// Every factor pinned to the value it takes in `cfg`.
    static ActionSpace single(const McConfig& cfg)
    {
        ActionSpace s;
        for (int i = 0; i < kNumParams; ++i) s.factors_[static_cast<std::size_t>(i)] = {param_value(cfg, i)};
        return s;
    }

    /// Keeps only `values` (must be admissible) for factor i.
    ActionSpace& restrict(int factor, std::vector<int> values)
    {
        check_factor(factor);
        if (values.empty()) throw Error(ErrorKind::InvalidConfig, "empty restriction for factor " + std::to_string(factor));
        auto grid = param_grid(factor);
        std::vector<int> kept;
        for (int v : grid)
            if (std::find(values.begin(), values.end(), v) != values.end()) kept.push_back(v);
        if (kept.size() != values.size())
            throw Error(ErrorKind::InvalidConfig,
                        "restriction for " + std::string(kParamNames[static_cast<std::size_t>(factor)]) +
                            " contains inadmissible or duplicate values");
        factors_[static_cast<std::size_t>(factor)] = std::move(kept);
        return *this;
    }

    int cardinality(int factor) const
    {
        check_factor(factor);
        return static_cast<int>(factors_[static_cast<std::size_t>(factor)].size());
    }

    std::array<int, kNumParams> cardinalities() const
    {
        std::array<int, kNumParams> out{};
        for (int i = 0; i < kNumParams; ++i) out[static_cast<std::size_t>(i)] = cardinality(i);
        return out;
    }

    /// Joint number of configurations.
    std::uint64_t size() const
    {
        std::uint64_t n = 1;
        for (const auto& f : factors_) n *= f.size();
        return n;
    }

    const std::vector<int>& values(int factor) const
    {
        check_factor(factor);
        return factors_[static_cast<std::size_t>(factor)];
    }

    McConfig decode(std::span<const int> idx) const
    {
        if (idx.size() != kNumParams)
            throw Error(ErrorKind::LengthMismatch, "action needs " + std::to_string(kNumParams) + " indices");
        McConfig c;
        for (int i = 0; i < kNumParams; ++i) {
            const auto& f = factors_[static_cast<std::size_t>(i)];
            int k = idx[static_cast<std::size_t>(i)];
            if (k < 0 || k >= static_cast<int>(f.size()))
                throw Error(ErrorKind::IndexOutOfRange, std::string(kParamNames[static_cast<std::size_t>(i)]) +
                                                            " index " + std::to_string(k) + " outside [0," +
                                                            std::to_string(f.size()) + ")");
            set_param_value(c, i, f[static_cast<std::size_t>(k)]);
        }
        return c;
    }

    ActionIndices encode(const McConfig& cfg) const
    {
        ActionIndices out{};
        for (int i = 0; i < kNumParams; ++i) {
            const auto& f = factors_[static_cast<std::size_t>(i)];
            int v = param_value(cfg, i);
            auto it = std::find(f.begin(), f.end(), v);
            if (it == f.end())
                throw Error(ErrorKind::InvalidConfig, std::string(kParamNames[static_cast<std::size_t>(i)]) + "=" +
                                                          param_value_name(i, v) + " is not in the action space");
            out[static_cast<std::size_t>(i)] = static_cast<int>(it - f.begin());
        }
        return out;
    }

    /// Mixed-radix rank of an index vector; factor 0 is most significant, so
    /// rank order is lexicographic order of index vectors.
    std::uint64_t rank(std::span<const int> idx) const
    {
        std::uint64_t r = 0;
        for (int i = 0; i < kNumParams; ++i) {
            auto card = static_cast<std::uint64_t>(cardinality(i));
            auto k = idx[static_cast<std::size_t>(i)];
            if (k < 0 || static_cast<std::uint64_t>(k) >= card)
                throw Error(ErrorKind::IndexOutOfRange, "index out of range for factor " + std::to_string(i));
            r = r * card + static_cast<std::uint64_t>(k);
        }
        return r;
    }

    ActionIndices unrank(std::uint64_t r) const
    {
        if (r >= size()) throw Error(ErrorKind::IndexOutOfRange, "rank " + std::to_string(r) + " out of range");
        ActionIndices idx{};
        for (int i = kNumParams - 1; i >= 0; --i) {
            auto card = static_cast<std::uint64_t>(cardinality(i));
            idx[static_cast<std::size_t>(i)] = static_cast<int>(r % card);
            r /= card;
        }
        return idx;
    }

    friend bool operator==(const ActionSpace&, const ActionSpace&) = default;

private:
    std::array<std::vector<int>, kNumParams> factors_;

    static void check_factor(int factor)
    {
        if (factor < 0 || factor >= kNumParams)
            throw Error(ErrorKind::IndexOutOfRange, "factor " + std::to_string(factor));
    }
};

} // namespace dramdse

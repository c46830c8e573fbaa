#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dramdse/analysis/grid.hpp"
#include "dramdse/env.hpp"

namespace dramdse::analysis {

inline constexpr std::uint64_t kOracleLimit = 1000000;

struct OracleResult {
    McConfig best_config;
    ActionIndices best_indices{};
    std::uint64_t best_rank = 0;
    double best_reward = 0.0;
    std::vector<SimMetrics> metrics; // by rank within the subspace
    std::vector<double> rewards;     // by rank within the subspace
};

/// Simulates every configuration of `space` and returns the one with the
/// highest reward. Ties go to the lowest rank (enumeration order).
inline OracleResult exhaustive_oracle(const ActionSpace& space, const MemoryTrace& trace, const DramProfile& profile,
                                      const Objective& objective, unsigned threads = 1)
{
    const std::uint64_t n = space.size();
    if (n > kOracleLimit)
        throw Error(ErrorKind::SubspaceTooLarge, "subspace has " + std::to_string(n) + " configurations (limit " +
                                                     std::to_string(kOracleLimit) + ")");
    require_valid(objective);
    OracleResult r;
    r.metrics.resize(n);
    r.rewards.resize(n);
    parallel_for(n, threads, [&](std::size_t i) {
        r.metrics[i] = simulate(trace, space.decode(space.unrank(i)), profile);
        r.rewards[i] = reward(objective, r.metrics[i]);
    });
    for (std::uint64_t i = 1; i < n; ++i)
        if (r.rewards[i] > r.rewards[r.best_rank]) r.best_rank = i;
    r.best_indices = space.unrank(r.best_rank);
    r.best_config = space.decode(r.best_indices);
    r.best_reward = r.rewards[r.best_rank];
    return r;
}

/// Header: rank, the ten parameter names, latency_ns, power_mw, energy_pj, reward.
inline std::string oracle_to_csv(const ActionSpace& space, const OracleResult& r)
{
    csv::Table out;
    out.header.push_back("rank");
    for (int j = 0; j < kNumParams; ++j) out.header.emplace_back(kParamNames[static_cast<std::size_t>(j)]);
    for (const char* h : {"latency_ns", "power_mw", "energy_pj", "reward"}) out.header.emplace_back(h);
    for (std::uint64_t i = 0; i < r.rewards.size(); ++i) {
        auto cfg = space.decode(space.unrank(i));
        std::vector<std::string> cells{std::to_string(i)};
        for (int j = 0; j < kNumParams; ++j) cells.push_back(param_value_name(j, param_value(cfg, j)));
        cells.push_back(csv::num(r.metrics[i].latency_ns));
        cells.push_back(csv::num(r.metrics[i].power_mw));
        cells.push_back(csv::num(r.metrics[i].energy_pj));
        cells.push_back(csv::num(r.rewards[i]));
        out.rows.push_back(std::move(cells));
    }
    return csv::to_string(out);
}

} // namespace dramdse::analysis

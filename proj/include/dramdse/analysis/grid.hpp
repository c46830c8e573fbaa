#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "dramdse/action_space.hpp"
#include "dramdse/csv.hpp"
#include "dramdse/rng.hpp"
#include "dramdse/simulator.hpp"

namespace dramdse::analysis {

struct SampleRow {
    McConfig config;
    SimMetrics metrics;
};

/// Grid-search samples. Column j < 10 is parameter j, then latency, power
/// and energy.
struct SampleTable {
    std::vector<SampleRow> rows;

    static constexpr int kColumns = kNumParams + 3;

    std::size_t n_rows() const { return rows.size(); }

    static std::string column_name(int j)
    {
        static const char* metric[] = {"latency_ns", "power_mw", "energy_pj"};
        return j < kNumParams ? std::string(kParamNames[static_cast<std::size_t>(j)]) : metric[j - kNumParams];
    }

    /// Parameter columns hold the raw value (category ordinal for enums).
    std::vector<double> column(int j) const
    {
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) {
            if (j < kNumParams)
                out.push_back(param_value(r.config, j));
            else if (j == kNumParams)
                out.push_back(r.metrics.latency_ns);
            else if (j == kNumParams + 1)
                out.push_back(r.metrics.power_mw);
            else
                out.push_back(r.metrics.energy_pj);
        }
        return out;
    }

    static bool is_categorical(int j) { return j < kNumParams && !is_numeric_param(j); }
};

/// Runs f(i) for i in [0, n) on up to `threads` threads. Each index is
/// handled by exactly one thread; callers write results by index.
template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& f)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += threads) f(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// n configurations drawn uniformly from the grid of `space` (one SplitMix64
/// draw per factor, factors in table order), each simulated on `trace`.
inline SampleTable random_grid_search(const ActionSpace& space, std::size_t n, const MemoryTrace& trace,
                                      const DramProfile& profile, std::uint64_t seed, unsigned threads = 1)
{
    if (n < 1) throw Error(ErrorKind::ConfigError, "grid search needs n >= 1");
    SplitMix64 rng(seed);
    SampleTable t;
    t.rows.resize(n);
    for (auto& row : t.rows) {
        ActionIndices idx{};
        for (int f = 0; f < kNumParams; ++f)
            idx[static_cast<std::size_t>(f)] = static_cast<int>(rng.below(static_cast<std::uint64_t>(space.cardinality(f))));
        row.config = space.decode(idx);
    }
    parallel_for(n, threads, [&](std::size_t i) { t.rows[i].metrics = simulate(trace, t.rows[i].config, profile); });
    return t;
}

/// Header: the ten parameter names, latency_ns, power_mw, energy_pj.
/// Categorical parameters are written by name.
inline std::string to_csv(const SampleTable& t)
{
    csv::Table out;
    for (int j = 0; j < SampleTable::kColumns; ++j) out.header.push_back(SampleTable::column_name(j));
    for (const auto& r : t.rows) {
        std::vector<std::string> cells;
        for (int j = 0; j < kNumParams; ++j) cells.push_back(param_value_name(j, param_value(r.config, j)));
        cells.push_back(csv::num(r.metrics.latency_ns));
        cells.push_back(csv::num(r.metrics.power_mw));
        cells.push_back(csv::num(r.metrics.energy_pj));
        out.rows.push_back(std::move(cells));
    }
    return csv::to_string(out);
}

inline SampleTable sample_table_from_csv(std::string_view text)
{
    auto t = csv::parse(text);
    SampleTable out;
    std::vector<int> col(SampleTable::kColumns);
    for (int j = 0; j < SampleTable::kColumns; ++j) col[static_cast<std::size_t>(j)] = t.require_column(SampleTable::column_name(j));
    for (const auto& cells : t.rows) {
        SampleRow r;
        for (int j = 0; j < kNumParams; ++j) {
            const auto& cell = cells[static_cast<std::size_t>(col[static_cast<std::size_t>(j)])];
            auto v = parse_param_value(j, cell);
            if (!v) throw Error(ErrorKind::ParseError, SampleTable::column_name(j) + ": bad value '" + cell + "'");
            set_param_value(r.config, j, *v);
        }
        require_valid(r.config);
        r.metrics.latency_ns = csv::to_double(cells[static_cast<std::size_t>(col[kNumParams])], "latency_ns");
        r.metrics.power_mw = csv::to_double(cells[static_cast<std::size_t>(col[kNumParams + 1])], "power_mw");
        r.metrics.energy_pj = csv::to_double(cells[static_cast<std::size_t>(col[kNumParams + 2])], "energy_pj");
        out.rows.push_back(r);
    }
    return out;
}

} // namespace dramdse::analysis

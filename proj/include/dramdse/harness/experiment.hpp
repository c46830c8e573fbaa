#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dramdse/agents/checkpoint.hpp"
#include "dramdse/agents/train.hpp"
#include "dramdse/harness/curves.hpp"
#include "dramdse/harness/spec.hpp"

namespace dramdse::harness {

/// One training run of the sweep.
struct Cell {
    agents::Mode mode = agents::Mode::MarlPpo;
    ObjectiveKind objective = ObjectiveKind::LowPower;
    double learning_rate = 0.0;
    std::uint64_t seed = 0;

    std::string key() const
    {
        return agents::to_string(mode) + "_" + to_string(objective) + "_lr" + csv::num(learning_rate) + "_seed" +
               std::to_string(seed);
    }
};

/// Sweep order: mode, objective, learning rate, seed.
inline std::vector<Cell> cells(const ExperimentSpec& s)
{
    std::vector<Cell> out;
    for (auto m : s.modes)
        for (auto o : s.objectives)
            for (double lr : s.learning_rates)
                for (auto seed : s.seeds) out.push_back({m, o, lr, seed});
    return out;
}

inline Objective make_objective(const ObjectiveSpec& o, ObjectiveKind kind, const SimMetrics& reference)
{
    auto obj = objective_from_reference(kind, reference, o.power_target_fraction, o.latency_target_fraction, o.reward_cap);
    if (o.power_target_mw > 0.0) obj.power_target_mw = o.power_target_mw;
    if (o.latency_target_ns > 0.0) obj.latency_target_ns = o.latency_target_ns;
    require_valid(obj);
    return obj;
}

struct CellResult {
    std::vector<CurveRow> curve;
    std::vector<double> wall_clock_s; // per curve point, since the run started
};

/// Trains and evaluates one cell. Deterministic given (spec, cell) apart
/// from the timings.
inline CellResult run_cell(const ExperimentSpec& s, const Cell& c, std::shared_ptr<const MemoryTrace> trace,
                           const SimMetrics& reference)
{
    const auto t0 = std::chrono::steady_clock::now();
    DramEnv env(trace, s.profile, make_objective(s.objective, c.objective, reference),
                s.categorical_only ? ActionSpace::categorical_only() : ActionSpace::full(), s.episode_len);
    auto opt = s.agent;
    opt.seed = c.seed;
    opt.set_learning_rate(c.learning_rate);
    agents::Roster roster(c.mode, env.space(), opt);

    CellResult out;
    const auto ckpt_dir = std::filesystem::path(s.output_dir) / "checkpoints" / c.key();
    auto record = [&](const agents::EvalPoint& p, const agents::Roster& r) {
        out.curve.push_back({agents::to_string(c.mode), s.trace_label(), to_string(c.objective), c.learning_rate, c.seed,
                             p.step, p.mean_return});
        out.wall_clock_s.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        const bool last = p.step == s.budget;
        if (s.checkpoints == CheckpointPolicy::All || (s.checkpoints == CheckpointPolicy::Final && last))
            agents::save_checkpoint(r, p.step, (ckpt_dir / ("step_" + std::to_string(p.step) + ".ckpt")).string());
    };
    if (s.budget == 0) {
        record({0, agents::evaluate(roster, env, s.eval_episodes)}, roster);
        return out;
    }
    agents::TrainOptions to;
    to.budget = s.budget;
    to.eval_interval = s.eval_interval;
    to.eval_episodes = s.eval_episodes;
    agents::train(roster, env, to, record);
    if (s.checkpoints == CheckpointPolicy::Final && out.curve.back().step != s.budget)
        agents::save_checkpoint(roster, s.budget, (ckpt_dir / ("step_" + std::to_string(s.budget) + ".ckpt")).string());
    return out;
}

struct ExperimentResult {
    std::vector<CurveRow> curves;
    std::vector<SummaryRow> summary;
};

using ProgressFn = std::function<void(const Cell&, std::size_t done, std::size_t total)>;

/// Runs every cell on up to `jobs` threads (each cell single-threaded),
/// writes each cell's curve atomically under cells/, then merges them into
/// curves.csv, summary.csv and timing.csv in output_dir. Outputs other than
/// timing.csv do not depend on `jobs`.
inline ExperimentResult run_experiment(const ExperimentSpec& s, unsigned jobs = 1, ProgressFn progress = {})
{
    validate(s);
    namespace fs = std::filesystem;
    auto trace = std::make_shared<const MemoryTrace>(make_trace(s.trace, s.profile));
    const auto reference = simulate(*trace, default_config(), s.profile);
    const auto all = cells(s);
    std::vector<CellResult> results(all.size());
    std::vector<std::exception_ptr> errors(all.size());
    std::atomic<std::size_t> next{0}, done{0};
    std::mutex progress_mu;

    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < all.size();) {
            try {
                results[i] = run_cell(s, all[i], trace, reference);
                csv::Table t;
                t.header = kCurveHeader;
                for (const auto& r : results[i].curve) t.rows.push_back(curve_cells(r));
                csv::write_file_atomic((fs::path(s.output_dir) / "cells" / (all[i].key() + ".csv")).string(),
                                       csv::to_string(t));
            } catch (const Error& e) {
                errors[i] = std::make_exception_ptr(Error(e.kind(), "run " + all[i].key() + ": " + e.message()));
            } catch (...) {
                errors[i] = std::current_exception();
            }
            const auto d = done.fetch_add(1) + 1;
            if (progress) {
                std::lock_guard lock(progress_mu);
                progress(all[i], d, all.size());
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(all.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    ExperimentResult out;
    csv::Table timing;
    timing.header = {"mode", "trace", "objective", "learning_rate", "seed", "training_step", "wall_clock_s"};
    for (const auto& r : results) {
        for (std::size_t k = 0; k < r.curve.size(); ++k) {
            auto row = curve_cells(r.curve[k]);
            row.back() = csv::num(r.wall_clock_s[k]);
            timing.rows.push_back(std::move(row));
        }
        out.curves.insert(out.curves.end(), r.curve.begin(), r.curve.end());
    }
    out.summary = summarize(out.curves);
    csv::write_file_atomic((fs::path(s.output_dir) / "curves.csv").string(), curves_to_csv(out.curves));
    csv::write_file_atomic((fs::path(s.output_dir) / "summary.csv").string(), summary_to_csv(out.summary));
    csv::write_file_atomic((fs::path(s.output_dir) / "timing.csv").string(), csv::to_string(timing));
    return out;
}

} // namespace dramdse::harness

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "dramdse/harness/curves.hpp"

namespace dramdse::harness {

struct ComparisonRow {
    std::string trace, objective, mode;
    double best_learning_rate = 0.0;
    Interval final_return;
    std::string reference; // formulation the ratio is taken against
    double ratio = 1.0;    // reference final mean / this final mean
    std::string winner;    // highest final mean in the (trace, objective) cell
};

/// Final-return comparison of formulations per (trace, objective) cell. The
/// ratio is taken against marl_ppo when present, else the first formulation
/// of the cell. Every cell must hold the same >= 2 formulations, evaluated
/// at the same final step; rows may come from several curve files but no
/// (mode, trace, objective, learning rate, seed, step) may repeat.
inline std::vector<ComparisonRow> compare_formulations(const std::vector<CurveRow>& rows)
{
    auto fail = [](const std::string& m) { throw Error(ErrorKind::MismatchedCells, m); };
    std::set<std::tuple<std::string, std::string, std::string, double, std::uint64_t, std::int64_t>> seen;
    for (const auto& r : rows)
        if (!seen.emplace(r.mode, r.trace, r.objective, r.learning_rate, r.seed, r.step).second)
            fail("duplicate curve point for " + r.mode + " on " + r.trace + "/" + r.objective);

    const auto summary = summarize(rows);
    std::vector<std::pair<std::string, std::string>> cells;
    for (const auto& s : summary)
        if (std::find(cells.begin(), cells.end(), std::make_pair(s.trace, s.objective)) == cells.end())
            cells.emplace_back(s.trace, s.objective);
    if (cells.empty()) fail("no curves to compare");

    std::set<std::string> modes0;
    std::vector<ComparisonRow> out;
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        std::vector<const SummaryRow*> in;
        std::set<std::string> modes;
        for (const auto& s : summary)
            if (s.trace == cells[ci].first && s.objective == cells[ci].second) {
                in.push_back(&s);
                modes.insert(s.mode);
            }
        const std::string where = cells[ci].first + "/" + cells[ci].second;
        if (in.size() < 2) fail(where + " has fewer than two formulations");
        if (ci == 0)
            modes0 = modes;
        else if (modes != modes0)
            fail(where + " has a different set of formulations than " + cells[0].first + "/" + cells[0].second);
        for (const auto* s : in)
            if (s->final_step != in.front()->final_step)
                fail(where + ": " + s->mode + " ends at step " + std::to_string(s->final_step) + ", " + in.front()->mode +
                     " at " + std::to_string(in.front()->final_step));

        const SummaryRow* ref = in.front();
        for (const auto* s : in)
            if (s->mode == "marl_ppo") ref = s;
        const SummaryRow* win = in.front();
        for (const auto* s : in)
            if (s->final_return.mean > win->final_return.mean) win = s;
        for (const auto* s : in) {
            ComparisonRow r;
            r.trace = s->trace;
            r.objective = s->objective;
            r.mode = s->mode;
            r.best_learning_rate = s->best_learning_rate;
            r.final_return = s->final_return;
            r.reference = ref->mode;
            r.ratio = s->final_return.mean == ref->final_return.mean
                          ? 1.0
                          : (s->final_return.mean == 0.0 ? std::numeric_limits<double>::infinity()
                                                         : ref->final_return.mean / s->final_return.mean);
            r.winner = win->mode;
            out.push_back(std::move(r));
        }
    }
    return out;
}

// comparison.csv: trace,objective,mode,best_learning_rate,final_mean,ci_low,ci_high,reference,ratio,winner
inline std::string comparison_to_csv(const std::vector<ComparisonRow>& rows)
{
    csv::Table t;
    t.header = {"trace", "objective", "mode", "best_learning_rate", "final_mean", "ci_low", "ci_high", "reference", "ratio", "winner"};
    for (const auto& r : rows)
        t.rows.push_back({r.trace, r.objective, r.mode, csv::num(r.best_learning_rate), csv::num(r.final_return.mean),
                          csv::num(r.final_return.low), csv::num(r.final_return.high), r.reference,
                          std::isinf(r.ratio) ? "inf" : csv::num(r.ratio), r.winner});
    return csv::to_string(t);
}

} // namespace dramdse::harness

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "dramdse/csv.hpp"

namespace dramdse::harness {

// curves.csv:
//   mode,trace,objective,learning_rate,seed,training_step,mean_episode_return
// training_step counts environment steps (for the time-multiplexed agent,
// one per emitted parameter).
inline const std::vector<std::string> kCurveHeader{"mode",          "trace", "objective", "learning_rate", "seed",
                                                   "training_step", "mean_episode_return"};

struct CurveRow {
    std::string mode;
    std::string trace;
    std::string objective;
    double learning_rate = 0.0;
    std::uint64_t seed = 0;
    std::int64_t step = 0;
    double mean_return = 0.0;
};

inline std::vector<std::string> curve_cells(const CurveRow& r)
{
    return {r.mode, r.trace, r.objective, csv::num(r.learning_rate), std::to_string(r.seed), std::to_string(r.step),
            csv::num(r.mean_return)};
}

inline std::string curves_to_csv(const std::vector<CurveRow>& rows)
{
    csv::Table t;
    t.header = kCurveHeader;
    for (const auto& r : rows) t.rows.push_back(curve_cells(r));
    return csv::to_string(t);
}

inline std::vector<CurveRow> curves_from_csv(std::string_view text)
{
    auto t = csv::parse(text);
    std::vector<int> c;
    for (const auto& h : kCurveHeader) c.push_back(t.require_column(h));
    std::vector<CurveRow> out;
    for (const auto& cells : t.rows) {
        auto at = [&](int k) -> const std::string& { return cells[static_cast<std::size_t>(c[static_cast<std::size_t>(k)])]; };
        CurveRow r;
        r.mode = at(0);
        r.trace = at(1);
        r.objective = at(2);
        r.learning_rate = csv::to_double(at(3), "learning_rate");
        const double seed = csv::to_double(at(4), "seed");
        const double step = csv::to_double(at(5), "training_step");
        if (seed < 0 || seed != std::floor(seed) || step < 0 || step != std::floor(step))
            throw Error(ErrorKind::ParseError, "seed and training_step must be non-negative integers");
        r.seed = static_cast<std::uint64_t>(seed);
        r.step = static_cast<std::int64_t>(step);
        r.mean_return = csv::to_double(at(6), "mean_episode_return");
        out.push_back(std::move(r));
    }
    return out;
}

/// Mean and two-sided 95% Student-t interval of a sample. A single value
/// gives a zero-width interval.
struct Interval {
    double mean = 0.0;
    double low = 0.0;
    double high = 0.0;
    std::size_t n = 0;
};

inline Interval t_interval(const std::vector<double>& v)
{
    Interval r;
    r.n = v.size();
    if (v.empty()) return r;
    double sum = 0.0;
    for (double x : v) sum += x;
    r.mean = sum / static_cast<double>(v.size());
    double half = 0.0;
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - r.mean) * (x - r.mean);
        const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
        boost::math::students_t dist(static_cast<double>(v.size() - 1));
        half = boost::math::quantile(dist, 0.975) * sd / std::sqrt(static_cast<double>(v.size()));
    }
    r.low = r.mean - half;
    r.high = r.mean + half;
    return r;
}

/// One (trace, objective, mode) group of a curves table.
struct CurveGroup {
    std::string trace, objective, mode;
    std::vector<const CurveRow*> rows;
};

/// Groups in first-seen order.
inline std::vector<CurveGroup> group_curves(const std::vector<CurveRow>& rows)
{
    std::vector<CurveGroup> groups;
    std::map<std::tuple<std::string, std::string, std::string>, std::size_t> index;
    for (const auto& r : rows) {
        auto key = std::make_tuple(r.trace, r.objective, r.mode);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, groups.size()).first;
            groups.push_back({r.trace, r.objective, r.mode, {}});
        }
        groups[it->second].rows.push_back(&r);
    }
    return groups;
}

struct SeriesPoint {
    std::int64_t step = 0;
    Interval across_seeds;
};

/// Per-step interval across seeds for one learning rate of a group.
inline std::vector<SeriesPoint> series(const CurveGroup& g, double learning_rate)
{
    std::map<std::int64_t, std::vector<double>> by_step;
    for (const auto* r : g.rows)
        if (r->learning_rate == learning_rate) by_step[r->step].push_back(r->mean_return);
    std::vector<SeriesPoint> out;
    for (const auto& [step, vals] : by_step) out.push_back({step, t_interval(vals)});
    return out;
}

struct SummaryRow {
    std::string mode, trace, objective;
    double best_learning_rate = 0.0;
    std::int64_t final_step = 0;
    Interval final_return; // across seeds at the best learning rate
};

/// For each group: the learning rate with the highest final-step mean
/// across seeds (first listed wins ties) and its 95% t-interval.
inline std::vector<SummaryRow> summarize(const std::vector<CurveRow>& rows)
{
    std::vector<SummaryRow> out;
    for (const auto& g : group_curves(rows)) {
        std::vector<double> lrs;
        for (const auto* r : g.rows)
            if (std::find(lrs.begin(), lrs.end(), r->learning_rate) == lrs.end()) lrs.push_back(r->learning_rate);
        SummaryRow best;
        bool have = false;
        for (double lr : lrs) {
            auto s = series(g, lr);
            const auto& last = s.back();
            if (!have || last.across_seeds.mean > best.final_return.mean) {
                best = {g.mode, g.trace, g.objective, lr, last.step, last.across_seeds};
                have = true;
            }
        }
        out.push_back(best);
    }
    return out;
}

// summary.csv: mode,trace,objective,best_learning_rate,seeds,final_step,final_mean,ci_low,ci_high
inline std::string summary_to_csv(const std::vector<SummaryRow>& rows)
{
    csv::Table t;
    t.header = {"mode", "trace", "objective", "best_learning_rate", "seeds", "final_step", "final_mean", "ci_low", "ci_high"};
    for (const auto& r : rows)
        t.rows.push_back({r.mode, r.trace, r.objective, csv::num(r.best_learning_rate), std::to_string(r.final_return.n),
                          std::to_string(r.final_step), csv::num(r.final_return.mean), csv::num(r.final_return.low),
                          csv::num(r.final_return.high)});
    return csv::to_string(t);
}

} // namespace dramdse::harness

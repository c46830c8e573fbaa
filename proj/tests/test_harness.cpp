#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "dramdse/harness/compare.hpp"
#include "dramdse/harness/experiment.hpp"
#include "dramdse/harness/plot.hpp"

using namespace dramdse;
using namespace dramdse::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("dramdse_test_" + name);
    fs::remove_all(p);
    return p;
}

ExperimentSpec tiny_spec(const fs::path& out)
{
    auto kv = KvFile::parse(R"(
[experiment]
modes = marl_ppo, sarl_sac, tdm_ppo
objectives = low_power
seeds = 0, 1
learning_rates = 2e-4, 1e-4
budget = 200
eval_interval = 50
[trace]
n = 120
[network]
hidden = 8
[sac]
batch_size = 16
min_replay_size = 16
)");
    auto s = spec_from_kv(kv);
    s.output_dir = out.string();
    return s;
}

std::string slurp(const fs::path& p) { return csv::read_file(p.string()); }

CurveRow row(const std::string& mode, double lr, std::uint64_t seed, std::int64_t step, double v,
             const std::string& objective = "low_power")
{
    return {mode, "random", objective, lr, seed, step, v};
}

} // namespace

TEST(Spec, DefaultsMatchTheSweepDefinition)
{
    auto s = spec_from_kv(KvFile::parse(""));
    EXPECT_EQ(s.seeds, (std::vector<std::uint64_t>{0, 1, 2, 3, 4}));
    EXPECT_EQ(s.learning_rates, (std::vector<double>{1e-5, 2e-5, 2e-4, 1e-4}));
    EXPECT_EQ(s.budget, 20000);
    EXPECT_EQ(s.eval_interval, 100);
    EXPECT_EQ(s.eval_episodes, 1);
    EXPECT_EQ(s.agent.ppo.batch_size, 128);
    EXPECT_EQ(s.agent.sac.batch_size, 256);
}

TEST(Spec, ParsesSectionsAndOverrides)
{
    auto kv = KvFile::parse(R"(
[experiment]
modes = sarl_ppo, tdm_ppo
objectives = joint
seeds = 3
learning_rates = 1e-3
space = categorical
checkpoints = none
[trace]
name = stream1k
kind = streaming
stride = 0x40
[objective]
reward_cap = 50
[ppo]
num_epochs = 3
[profile]
t_cl = 12
)");
    apply_overrides(kv, {"experiment.seeds=7,8", "ppo.entropy_cost = 0.02"});
    auto s = spec_from_kv(kv);
    EXPECT_EQ(s.modes, (std::vector<agents::Mode>{agents::Mode::SarlPpo, agents::Mode::TdmPpo}));
    EXPECT_EQ(s.objectives, (std::vector<ObjectiveKind>{ObjectiveKind::Joint}));
    EXPECT_EQ(s.seeds, (std::vector<std::uint64_t>{7, 8}));
    EXPECT_TRUE(s.categorical_only);
    EXPECT_EQ(s.checkpoints, CheckpointPolicy::None);
    EXPECT_EQ(s.trace_label(), "stream1k");
    EXPECT_EQ(s.trace.stride, 64u);
    EXPECT_EQ(s.objective.reward_cap, 50.0);
    EXPECT_EQ(s.agent.ppo.num_epochs, 3);
    EXPECT_EQ(s.agent.ppo.entropy_cost, 0.02);
    EXPECT_EQ(s.profile.t_cl, 12);
}

TEST(Spec, RejectsInvalidSpecs)
{
    for (const char* bad : {"[experiment]\nseeds =\n", "[experiment]\nlearning_rates = 0\n",
                            "[experiment]\neval_interval = 0\n", "[experiment]\nmodes = mappo\n",
                            "[experiment]\nbudget = -1\n", "[experiment]\nunknown = 1\n", "[sac]\nn_step = 3\n",
                            "[ppo]\nclip_value = true\n", "[experiment]\ncheckpoints = some\n", "[profile]\nt_xyz = 1\n"}) {
        try {
            spec_from_kv(KvFile::parse(bad));
            ADD_FAILURE() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::ConfigError) << bad;
        }
    }
    KvFile kv;
    EXPECT_THROW(apply_overrides(kv, {"noequals"}), Error);
}

TEST(Spec, FullMatrixHasTwentyFourCells)
{
    std::set<std::tuple<std::string, agents::Mode, ObjectiveKind>> grid;
    for (const char* trace : {"random", "streaming"}) {
        auto kv = KvFile::parse(std::string("[experiment]\nmodes = marl_ppo, sarl_ppo, sarl_sac, tdm_ppo\n"
                                            "objectives = low_power, low_latency, joint\n[trace]\nkind = ") +
                                trace + "\n");
        auto s = spec_from_kv(kv);
        EXPECT_EQ(cells(s).size(), 4u * 3u * 5u * 4u);
        for (const auto& c : cells(s)) grid.emplace(s.trace_label(), c.mode, c.objective);
    }
    EXPECT_EQ(grid.size(), 24u);
}

TEST(Curves, CsvRoundTripAndParseErrors)
{
    std::vector<CurveRow> rows{row("marl_ppo", 2e-4, 0, 0, 1.5), row("marl_ppo", 2e-4, 0, 100, 2.25)};
    auto text = curves_to_csv(rows);
    EXPECT_EQ(text.substr(0, text.find('\n')), "mode,trace,objective,learning_rate,seed,training_step,mean_episode_return");
    auto back = curves_from_csv(text);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].step, 100);
    EXPECT_EQ(back[1].mean_return, 2.25);
    EXPECT_EQ(curves_to_csv(back), text);
    EXPECT_THROW(curves_from_csv("mode,trace\nx,y\n"), Error);
    EXPECT_THROW(curves_from_csv(text + "marl_ppo,random,low_power,2e-4,0\n"), Error);
    EXPECT_THROW(curves_from_csv(text + "marl_ppo,random,low_power,2e-4,0,abc,1\n"), Error);
}

TEST(Curves, StudentTInterval)
{
    // t(0.975, 4) = 2.7764451051977987 (standard table value).
    auto r = t_interval({1, 2, 3, 4, 5});
    const double half = 2.7764451051977987 * std::sqrt(2.5) / std::sqrt(5.0);
    EXPECT_DOUBLE_EQ(r.mean, 3.0);
    EXPECT_NEAR(r.high - r.mean, half, 1e-12);
    EXPECT_NEAR(r.mean - r.low, half, 1e-12);
    auto one = t_interval({4.0});
    EXPECT_EQ(one.low, 4.0);
    EXPECT_EQ(one.high, 4.0);
    auto same = t_interval({2.0, 2.0, 2.0});
    EXPECT_EQ(same.high - same.low, 0.0);
}

TEST(Curves, SummaryPicksBestFinalLearningRate)
{
    std::vector<CurveRow> rows;
    for (std::uint64_t seed : {0u, 1u}) {
        rows.push_back(row("marl_ppo", 1e-4, seed, 0, 1.0));
        rows.push_back(row("marl_ppo", 1e-4, seed, 100, 5.0 + static_cast<double>(seed)));
        rows.push_back(row("marl_ppo", 2e-4, seed, 0, 9.0));
        rows.push_back(row("marl_ppo", 2e-4, seed, 100, 4.0));
        rows.push_back(row("sarl_ppo", 3e-4, seed, 0, 1.0));
        rows.push_back(row("sarl_ppo", 3e-4, seed, 100, 1.0));
        rows.push_back(row("sarl_ppo", 1e-5, seed, 0, 1.0));
        rows.push_back(row("sarl_ppo", 1e-5, seed, 100, 1.0));
    }
    auto s = summarize(rows);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].mode, "marl_ppo");
    EXPECT_EQ(s[0].best_learning_rate, 1e-4);
    EXPECT_EQ(s[0].final_step, 100);
    EXPECT_DOUBLE_EQ(s[0].final_return.mean, 5.5);
    EXPECT_EQ(s[0].final_return.n, 2u);
    EXPECT_EQ(s[1].best_learning_rate, 3e-4); // tie: first listed
}

TEST(Experiment, BudgetZeroGivesOnlyTheUntrainedPoint)
{
    auto dir = scratch("budget0");
    auto s = tiny_spec(dir);
    s.budget = 0;
    auto r = run_experiment(s);
    EXPECT_EQ(r.curves.size(), cells(s).size());
    for (const auto& c : r.curves) EXPECT_EQ(c.step, 0);
    EXPECT_TRUE(fs::exists(dir / "checkpoints" / cells(s).front().key() / "step_0.ckpt"));
    fs::remove_all(dir);
}

TEST(Experiment, RerunsAreByteIdenticalAndIndependentOfJobs)
{
    auto a = scratch("det_a"), b = scratch("det_b");
    auto sa = tiny_spec(a), sb = tiny_spec(b);
    auto ra = run_experiment(sa, 1);
    run_experiment(sb, 3);
    for (const char* f : {"curves.csv", "summary.csv"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    for (const auto& c : cells(sa)) EXPECT_EQ(slurp(a / "cells" / (c.key() + ".csv")), slurp(b / "cells" / (c.key() + ".csv")));
    // Every point lands on a multiple of the interval, 0..budget.
    EXPECT_EQ(ra.curves.size(), cells(sa).size() * 5);
    for (const auto& c : ra.curves) EXPECT_EQ(c.step % sa.eval_interval, 0);
    EXPECT_EQ(ra.summary.size(), 3u);
    auto timing = csv::parse(slurp(a / "timing.csv"));
    EXPECT_EQ(timing.rows.size(), ra.curves.size());
    EXPECT_GE(timing.require_column("wall_clock_s"), 0);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Experiment, CurvePointsReproduceFromCheckpoints)
{
    auto dir = scratch("ckpt");
    auto s = tiny_spec(dir);
    s.checkpoints = CheckpointPolicy::All;
    s.learning_rates = {2e-4};
    s.seeds = {4};
    auto r = run_experiment(s);
    auto trace = std::make_shared<const MemoryTrace>(make_trace(s.trace, s.profile));
    auto ref = simulate(*trace, default_config(), s.profile);
    for (const auto& c : cells(s)) {
        DramEnv env(trace, s.profile, make_objective(s.objective, c.objective, ref), ActionSpace::full(), s.episode_len);
        auto opt = s.agent;
        opt.seed = c.seed;
        opt.set_learning_rate(c.learning_rate);
        int checked = 0;
        for (const auto& p : r.curves) {
            if (p.mode != agents::to_string(c.mode)) continue;
            agents::Roster roster(c.mode, env.space(), opt);
            auto step = agents::load_checkpoint_file(
                roster, (dir / "checkpoints" / c.key() / ("step_" + std::to_string(p.step) + ".ckpt")).string());
            EXPECT_EQ(step, p.step);
            EXPECT_EQ(agents::evaluate(roster, env, s.eval_episodes), p.mean_return) << c.key() << " @" << p.step;
            ++checked;
        }
        EXPECT_EQ(checked, 5);
    }
    fs::remove_all(dir);
}

TEST(Experiment, SimulationErrorsCarryRunContext)
{
    auto dir = scratch("err");
    auto s = tiny_spec(dir);
    s.trace.kind = "file";
    s.trace.path = (dir / "missing.trace").string();
    EXPECT_THROW(run_experiment(s), Error);
    s.trace.kind = "bogus";
    EXPECT_THROW(run_experiment(s), Error);
    fs::remove_all(dir);
}

TEST(Plot, SinglePointGivesOneMarker)
{
    auto svg = plot_curves({row("marl_ppo", 2e-4, 0, 0, 3.0)});
    std::size_t n = 0;
    for (auto p = svg.find("<circle"); p != std::string::npos; p = svg.find("<circle", p + 1)) ++n;
    EXPECT_EQ(n, 1u);
    EXPECT_EQ(svg.rfind("</svg>\n"), svg.size() - 7);
    EXPECT_THROW(plot_curves({}), Error);
}

TEST(Plot, IdenticalSeedsGiveZeroWidthBandAndOutputIsStable)
{
    std::vector<CurveRow> rows;
    for (std::uint64_t seed : {0u, 1u, 2u})
        for (std::int64_t step : {0, 100, 200}) rows.push_back(row("marl_ppo", 2e-4, seed, step, 1.0 + static_cast<double>(step) / 100));
    auto svg = plot_curves(rows);
    auto at = svg.find("<polygon points=\"");
    ASSERT_NE(at, std::string::npos);
    const std::size_t from = at + std::string("<polygon points=\"").size();
    auto pts = svg.substr(from, svg.find('"', from) - from);
    std::vector<std::string> p;
    for (std::size_t s = 0, e; s < pts.size(); s = e + 1) {
        e = pts.find(' ', s);
        if (e == std::string::npos) e = pts.size();
        p.push_back(pts.substr(s, e - s));
    }
    ASSERT_EQ(p.size(), 6u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(p[i], p[5 - i]); // upper edge == lower edge
    EXPECT_EQ(plot_curves(rows), svg);
    rows.push_back(row("sarl_ppo", 2e-4, 0, 0, 1.0, "joint"));
    auto two = plot_curves(rows);
    EXPECT_NE(two.find("random / joint"), std::string::npos);
    EXPECT_NE(two.find("random / low_power"), std::string::npos);
}

TEST(Compare, IdenticalCurvesGiveUnitRatio)
{
    std::vector<CurveRow> rows;
    for (const char* m : {"sarl_ppo", "tdm_ppo"})
        for (std::uint64_t seed : {0u, 1u}) {
            rows.push_back(row(m, 2e-4, seed, 0, 1.0));
            rows.push_back(row(m, 2e-4, seed, 100, 2.0 + static_cast<double>(seed)));
        }
    auto c = compare_formulations(rows);
    ASSERT_EQ(c.size(), 2u);
    for (const auto& r : c) {
        EXPECT_EQ(r.ratio, 1.0);
        EXPECT_EQ(r.reference, "sarl_ppo");
    }
}

TEST(Compare, RatiosAgainstMarlAndWinner)
{
    std::vector<CurveRow> rows;
    const std::vector<std::pair<std::string, double>> finals{{"sarl_ppo", 2.0}, {"marl_ppo", 8.0}, {"tdm_ppo", 1.0}};
    for (const char* obj : {"low_power", "joint"})
        for (const auto& [m, v] : finals) {
            rows.push_back(row(m, 2e-4, 0, 0, 0.5, obj));
            rows.push_back(row(m, 2e-4, 0, 100, v, obj));
        }
    auto c = compare_formulations(rows);
    ASSERT_EQ(c.size(), 6u); // rows = formulations per cell
    EXPECT_EQ(c[0].mode, "sarl_ppo");
    EXPECT_DOUBLE_EQ(c[0].ratio, 4.0);
    EXPECT_DOUBLE_EQ(c[2].ratio, 8.0);
    for (const auto& r : c) {
        EXPECT_EQ(r.winner, "marl_ppo");
        EXPECT_EQ(r.reference, "marl_ppo");
    }
    EXPECT_NE(comparison_to_csv(c).find("trace,objective,mode,best_learning_rate"), std::string::npos);
}

TEST(Compare, MismatchedCellsAreRejected)
{
    auto expect_mismatch = [](const std::vector<CurveRow>& rows) {
        try {
            compare_formulations(rows);
            ADD_FAILURE();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::MismatchedCells);
        }
    };
    expect_mismatch({row("marl_ppo", 2e-4, 0, 0, 1.0)});
    expect_mismatch({row("marl_ppo", 2e-4, 0, 0, 1.0), row("marl_ppo", 2e-4, 0, 0, 1.0), row("sarl_ppo", 2e-4, 0, 0, 1.0)});
    expect_mismatch({row("marl_ppo", 2e-4, 0, 0, 1.0), row("sarl_ppo", 2e-4, 0, 100, 1.0)});
    expect_mismatch({row("marl_ppo", 2e-4, 0, 0, 1.0), row("sarl_ppo", 2e-4, 0, 0, 1.0),
                     row("marl_ppo", 2e-4, 0, 0, 1.0, "joint"), row("tdm_ppo", 2e-4, 0, 0, 1.0, "joint")});
    expect_mismatch({});
}

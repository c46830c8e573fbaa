#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dramdse/agents/roster.hpp"
#include "dramdse/learn/replay.hpp"

namespace dramdse::agents {

/// PPO rollouts just before each update, indexed [agent][worker].
using RolloutHook = std::function<void(const std::vector<std::vector<PpoSegment>>&)>;

struct TrainOptions {
    std::int64_t budget = 20000; // environment steps (TDM: one per emitted parameter)
    int eval_interval = 100;
    int eval_episodes = 1;
    RolloutHook on_rollout; // optional, for inspection
};

struct EvalPoint {
    std::int64_t step = 0;
    double mean_return = 0.0;
};

/// Called after every evaluation; may e.g. write a checkpoint.
using EvalHook = std::function<void(const EvalPoint&, const Roster&)>;

namespace detail {

// Learner-side reward standardization. Evaluation always reports raw rewards.
class RewardScaler {
public:
    double operator()(double r)
    {
        stats_.push(r);
        return stats_.count() < 2 ? 0.0 : (r - stats_.mean()) / std::max(stats_.stddev(), 1e-6);
    }

private:
    learn::RunningStats stats_;
};

class Evaluator {
public:
    Evaluator(const DramEnv& env, const TrainOptions& o, EvalHook hook, std::vector<EvalPoint>& out)
        : env_(env), opt_(o), hook_(std::move(hook)), out_(out)
    {
    }

    void at(std::int64_t step, const Roster& roster)
    {
        if (step % opt_.eval_interval != 0) return;
        EvalPoint p{step, evaluate(roster, env_, opt_.eval_episodes)};
        out_.push_back(p);
        if (hook_) hook_(p, roster);
    }

private:
    const DramEnv& env_;
    const TrainOptions& opt_;
    EvalHook hook_;
    std::vector<EvalPoint>& out_;
};

struct BanditWorker {
    DramEnv env;
    Observation obs;
    int t = 0;
};

inline void train_ppo_bandit(Roster& roster, const DramEnv& env, const TrainOptions& opt, Evaluator& eval)
{
    auto& agents = roster.ppo_agents();
    const auto& hyper = agents.front().hyper();
    std::vector<BanditWorker> workers;
    for (int w = 0; w < hyper.num_workers(); ++w) {
        workers.push_back({env, {}, 0});
        workers.back().obs = workers.back().env.reset(static_cast<std::uint64_t>(w));
    }
    RewardScaler scale;
    std::int64_t step = 0;
    while (step < opt.budget) {
        // segments[agent][worker]
        std::vector<std::vector<PpoSegment>> segments(agents.size(), std::vector<PpoSegment>(workers.size()));
        bool full = true;
        for (std::size_t w = 0; w < workers.size() && full; ++w) {
            auto& wk = workers[w];
            for (int u = 0; u < hyper.unroll_length; ++u) {
                if (step >= opt.budget) {
                    full = false;
                    break;
                }
                Vector x = bandit_features(wk.env, wk.obs, wk.t);
                ActionIndices joint{};
                std::vector<PpoDecision> dec;
                dec.reserve(agents.size());
                for (auto& ag : agents) {
                    dec.push_back(ag.sample(x));
                    for (std::size_t h = 0; h < ag.factors().size(); ++h)
                        joint[static_cast<std::size_t>(ag.factors()[h])] = dec.back().choice[h];
                }
                auto tr = wk.env.step(joint);
                const double r = scale(tr.reward);
                for (std::size_t i = 0; i < agents.size(); ++i) {
                    auto& s = segments[i][w];
                    s.features.push_back(x);
                    s.actions.push_back(dec[i].choice);
                    s.logp.push_back(dec[i].logp);
                    s.values.push_back(dec[i].value);
                    s.rewards.push_back(r); // shared by every agent
                    s.dones.push_back(tr.done ? 1 : 0);
                }
                ++step;
                if (tr.done) {
                    wk.obs = wk.env.reset();
                    wk.t = 0;
                } else {
                    wk.obs = tr.next_observation;
                    ++wk.t;
                }
                eval.at(step, roster);
            }
            Vector xb = bandit_features(wk.env, wk.obs, wk.t);
            for (std::size_t i = 0; i < agents.size(); ++i) segments[i][w].bootstrap_value = agents[i].value(xb);
        }
        if (!full) break;
        if (opt.on_rollout) opt.on_rollout(segments);
        for (std::size_t i = 0; i < agents.size(); ++i) agents[i].update(segments[i]);
    }
}

inline void train_ppo_tdm(Roster& roster, const DramEnv& env, const TrainOptions& opt, Evaluator& eval)
{
    auto& agent = roster.ppo_agents().front();
    const auto& hyper = agent.hyper();
    std::vector<TdmEnv> workers;
    for (int w = 0; w < hyper.num_workers(); ++w) {
        workers.emplace_back(env);
        workers.back().reset(static_cast<std::uint64_t>(w));
    }
    RewardScaler scale;
    std::int64_t step = 0;
    while (step < opt.budget) {
        std::vector<PpoSegment> segments(workers.size());
        bool full = true;
        for (std::size_t w = 0; w < workers.size() && full; ++w) {
            auto& tdm = workers[w];
            auto& s = segments[w];
            for (int u = 0; u < hyper.unroll_length; ++u) {
                if (step >= opt.budget) {
                    full = false;
                    break;
                }
                Vector x = tdm_features(tdm);
                const int f = tdm.factor();
                auto d = agent.sample(x, f);
                auto tr = tdm.step(d.choice[static_cast<std::size_t>(f)]);
                // Only cycle-closing rewards are standardized; the zeros of
                // the intermediate slots stay exactly zero.
                const bool closes = tdm.slot() == 0;
                s.features.push_back(x);
                s.actions.push_back(d.choice);
                s.logp.push_back(d.logp);
                s.values.push_back(d.value);
                s.rewards.push_back(closes ? scale(tr.reward) : 0.0);
                s.dones.push_back(tr.done ? 1 : 0);
                ++step;
                if (tr.done) tdm.reset();
                eval.at(step, roster);
            }
            s.bootstrap_value = agent.value(tdm_features(tdm));
        }
        if (!full) break;
        if (opt.on_rollout) opt.on_rollout({segments});
        agent.update(segments);
    }
}

inline void train_sac(Roster& roster, const DramEnv& env, const TrainOptions& opt, Evaluator& eval)
{
    auto& agent = roster.sac();
    DramEnv e(env);
    auto obs = e.reset();
    int t = 0;
    RewardScaler scale;
    for (std::int64_t step = 0; step < opt.budget;) {
        Vector x = bandit_features(e, obs, t);
        auto a = agent.sample(x);
        ActionIndices joint{};
        std::copy(a.begin(), a.end(), joint.begin());
        auto tr = e.step(joint);
        Vector xn = bandit_features(e, tr.next_observation, t + 1);
        agent.observe({x, a, scale(tr.reward), xn, tr.done});
        ++step;
        if (tr.done) {
            obs = e.reset();
            t = 0;
        } else {
            obs = tr.next_observation;
            ++t;
        }
        eval.at(step, roster);
    }
}

} // namespace detail

/// Trains `roster` on copies of `env` for opt.budget environment steps and
/// evaluates the greedy policy at step 0 and every eval_interval steps.
inline std::vector<EvalPoint> train(Roster& roster, const DramEnv& env, const TrainOptions& opt, EvalHook hook = {})
{
    if (opt.budget <= 0) throw Error(ErrorKind::BudgetZero, "training budget must be > 0 environment steps");
    if (opt.eval_interval < 1) throw Error(ErrorKind::ConfigError, "eval_interval must be >= 1");
    std::vector<EvalPoint> curve;
    detail::Evaluator eval(env, opt, std::move(hook), curve);
    eval.at(0, roster);
    switch (roster.mode()) {
    case Mode::MarlPpo:
    case Mode::SarlPpo: detail::train_ppo_bandit(roster, env, opt, eval); break;
    case Mode::TdmPpo: detail::train_ppo_tdm(roster, env, opt, eval); break;
    case Mode::SarlSac: detail::train_sac(roster, env, opt, eval); break;
    }
    return curve;
}

} // namespace dramdse::agents

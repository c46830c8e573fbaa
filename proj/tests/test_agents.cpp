#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "dramdse/agents/checkpoint.hpp"
#include "dramdse/agents/train.hpp"

using namespace dramdse;
using namespace dramdse::agents;

namespace {

DramEnv make_env(ObjectiveKind kind, ActionSpace space = ActionSpace::full())
{
    auto trace = std::make_shared<const MemoryTrace>(gen_random(200, 0x1FFFFFC0, 8, 0.7, 3));
    DramProfile p;
    auto ref = simulate(*trace, default_config(), p);
    return DramEnv(trace, p, objective_from_reference(kind, ref), std::move(space));
}

AgentOptions small_options(std::uint64_t seed = 1)
{
    AgentOptions o;
    o.hidden = {16, 16};
    o.seed = seed;
    return o;
}

std::vector<double> all_params(Roster& r)
{
    std::vector<double> out;
    auto add = [&](const learn::Mlp& m) { out.insert(out.end(), m.params().begin(), m.params().end()); };
    if (r.mode() == Mode::SarlSac) {
        add(r.sac().actor());
        add(r.sac().q1());
        add(r.sac().q2());
        add(r.sac().target_q1());
        add(r.sac().target_q2());
        out.push_back(r.sac().log_alpha());
    } else {
        for (auto& a : r.ppo_agents()) {
            add(a.actor());
            add(a.critic());
        }
    }
    return out;
}

ActionIndices random_indices(const ActionSpace& s, std::mt19937_64& rng)
{
    ActionIndices a{};
    for (int i = 0; i < kNumParams; ++i)
        a[static_cast<std::size_t>(i)] = static_cast<int>(rng() % static_cast<std::uint64_t>(s.cardinality(i)));
    return a;
}

} // namespace

TEST(Roster, OwnershipIsAPartitionInEveryMode)
{
    for (Mode m : kAllModes) {
        Roster r(m, ActionSpace::full(), small_options());
        std::multiset<int> owned;
        for (const auto& f : r.ownership()) owned.insert(f.begin(), f.end());
        ASSERT_EQ(owned.size(), static_cast<std::size_t>(kNumParams)) << to_string(m);
        for (int i = 0; i < kNumParams; ++i) EXPECT_EQ(owned.count(i), 1u) << to_string(m);
        EXPECT_EQ(r.num_agents(), m == Mode::MarlPpo ? kNumParams : 1);
    }
}

TEST(Roster, ModeNames)
{
    for (Mode m : kAllModes) EXPECT_EQ(parse_mode(to_string(m)), m);
    EXPECT_THROW(parse_mode("mappo"), Error);
}

TEST(Roster, MarlAgentsHaveIndependentNetworks)
{
    Roster r(Mode::MarlPpo, ActionSpace::full(), small_options());
    const auto& a = r.ppo_agents();
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].heads().num_heads(), 1);
        EXPECT_EQ(a[i].heads().card(0), kParamCardinality[i]);
        for (std::size_t j = 0; j < i; ++j)
            if (a[i].actor().num_params() == a[j].actor().num_params()) {
                EXPECT_NE(a[i].actor().params(), a[j].actor().params());
            }
    }
}

TEST(Roster, JointLogProbIsSumOfHeads)
{
    Roster r(Mode::SarlPpo, ActionSpace::full(), small_options());
    auto& ag = r.ppo_agents().front();
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 50; ++trial) {
        Vector x(kBanditFeatures);
        for (int i = 0; i < kBanditFeatures; ++i) x(i) = g(rng);
        auto d = ag.sample(x);
        auto lp = ag.head_logp(x);
        double sum = 0.0;
        for (int h = 0; h < kNumParams; ++h) sum += lp[static_cast<std::size_t>(h)](d.choice[static_cast<std::size_t>(h)]);
        EXPECT_NEAR(d.logp, sum, 1e-10);
    }
}

TEST(Roster, ZeroWeightsGiveUniformJointPolicy)
{
    for (Mode m : {Mode::SarlPpo, Mode::SarlSac}) {
        Roster r(m, ActionSpace::full(), small_options());
        auto& actor = m == Mode::SarlSac ? r.sac().actor() : r.ppo_agents().front().actor();
        std::fill(actor.params().begin(), actor.params().end(), 0.0);
        Vector x = Vector::Ones(kBanditFeatures);
        Matrix logits = actor.forward(x);
        const learn::HeadLayout& heads = m == Mode::SarlSac ? r.sac().heads() : r.ppo_agents().front().heads();
        double joint = 0.0;
        for (int h = 0; h < kNumParams; ++h) {
            Vector lp = learn::log_softmax(logits.col(0).segment(heads.offset(h), heads.card(h)));
            for (int k = 0; k < lp.size(); ++k) EXPECT_NEAR(lp(k), -std::log(heads.card(h)), 1e-12);
            joint += lp(0);
        }
        EXPECT_NEAR(joint, -std::log(1769472.0), 1e-9);
    }
}

TEST(Roster, GreedyIsPerHeadArgmax)
{
    Roster r(Mode::SarlSac, ActionSpace::full(), small_options());
    Vector x = Vector::LinSpaced(kBanditFeatures, -1.0, 1.0);
    auto a = r.act_greedy(x);
    Matrix logits = r.sac().actor().forward(x);
    const auto& heads = r.sac().heads();
    for (int h = 0; h < kNumParams; ++h) {
        Eigen::Index best = 0;
        logits.col(0).segment(heads.offset(h), heads.card(h)).maxCoeff(&best);
        EXPECT_EQ(a[static_cast<std::size_t>(h)], static_cast<int>(best));
    }
    EXPECT_THROW(Roster(Mode::TdmPpo, ActionSpace::full(), small_options()).act_greedy(x), Error);
}

TEST(Tdm, SlotOrderStartsWithPagePolicyThenBufferSize)
{
    EXPECT_EQ(kTdmSlotOrder[0], 4); // page_policy
    EXPECT_EQ(kTdmSlotOrder[1], 2); // request_buffer_size
    std::set<int> s(kTdmSlotOrder.begin(), kTdmSlotOrder.end());
    EXPECT_EQ(s.size(), static_cast<std::size_t>(kNumParams));
    EXPECT_EQ(kParamNames[4], "page_policy");
    EXPECT_EQ(kParamNames[2], "request_buffer_size");
}

TEST(Tdm, CycleRewardsMatchSingleShotStep)
{
    auto env = make_env(ObjectiveKind::Joint);
    TdmEnv tdm(env);
    tdm.reset();
    std::mt19937_64 rng(11);
    for (int cycle = 0; cycle < 40; ++cycle) {
        if (tdm.env().step_count() == tdm.env().episode_len()) tdm.reset();
        auto target = random_indices(env.space(), rng);
        for (int k = 0; k < kNumParams; ++k) {
            EXPECT_EQ(tdm.slot(), k);
            Vector x = tdm_features(tdm);
            for (int j = 0; j < kNumParams; ++j) EXPECT_EQ(x(kBanditFeatures + j), j == k ? 1.0 : 0.0);
            auto t = tdm.step(target[static_cast<std::size_t>(tdm.factor())]);
            if (k + 1 < kNumParams) {
                EXPECT_EQ(t.reward, 0.0);
            } else {
                EXPECT_GT(t.reward, 0.0);
                EXPECT_EQ(t.reward, env.reward_for(env.space().decode(target)));
            }
        }
    }
    EXPECT_THROW(tdm.step(99), Error);
}

TEST(Evaluate, DeterministicPureAndBelowCap)
{
    auto env = make_env(ObjectiveKind::LowPower);
    for (Mode m : kAllModes) {
        Roster r(m, ActionSpace::full(), small_options(4));
        auto before = all_params(r);
        auto env_before = env.last_observation();
        double a = evaluate(r, env, 1);
        double b = evaluate(r, env, 3);
        EXPECT_DOUBLE_EQ(a, b) << to_string(m);
        EXPECT_EQ(all_params(r), before);
        EXPECT_EQ(env.last_observation(), env_before);
        EXPECT_LT(a, env.objective().reward_cap * env.episode_len());
    }
    Roster r(Mode::MarlPpo, ActionSpace::full(), small_options());
    EXPECT_THROW(evaluate(r, env, 0), Error);
}

TEST(Train, RejectsZeroBudgetAndBadInterval)
{
    auto env = make_env(ObjectiveKind::LowPower);
    Roster r(Mode::MarlPpo, ActionSpace::full(), small_options());
    TrainOptions o;
    o.budget = 0;
    try {
        train(r, env, o);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::BudgetZero);
    }
    o.budget = 10;
    o.eval_interval = 0;
    EXPECT_THROW(train(r, env, o), Error);
}

TEST(Train, MarlRolloutsShareRewardAndKeepOwnLogProbs)
{
    auto env = make_env(ObjectiveKind::LowPower);
    Roster r(Mode::MarlPpo, ActionSpace::full(), small_options());
    TrainOptions o;
    o.budget = 128; // exactly one rollout
    int calls = 0;
    o.on_rollout = [&](const std::vector<std::vector<PpoSegment>>& seg) {
        ++calls;
        ASSERT_EQ(seg.size(), static_cast<std::size_t>(kNumParams));
        for (std::size_t w = 0; w < seg[0].size(); ++w)
            for (std::size_t t = 0; t < seg[0][w].size(); ++t) {
                for (std::size_t i = 0; i < seg.size(); ++i) {
                    const auto& s = seg[i][w];
                    EXPECT_EQ(s.rewards[t], seg[0][w].rewards[t]);
                    ASSERT_EQ(s.actions[t].size(), 1u);
                    auto lp = r.ppo_agents()[i].head_logp(s.features[t]);
                    ASSERT_EQ(lp.size(), 1u);
                    EXPECT_NEAR(s.logp[t], lp[0](s.actions[t][0]), 1e-12);
                }
            }
    };
    train(r, env, o);
    EXPECT_EQ(calls, 1);
}

TEST(Train, TdmRolloutsCarryNineZeros)
{
    auto env = make_env(ObjectiveKind::LowPower);
    Roster r(Mode::TdmPpo, ActionSpace::full(), small_options());
    TrainOptions o;
    o.budget = 128;
    o.on_rollout = [&](const std::vector<std::vector<PpoSegment>>& seg) {
        ASSERT_EQ(seg.size(), 1u);
        // Each worker starts its first rollout at slot 0.
        for (const auto& s : seg[0]) {
            ASSERT_EQ(s.size(), 16u);
            for (std::size_t t = 0; t < s.size(); ++t)
                if (t % kNumParams != kNumParams - 1) {
                    EXPECT_EQ(s.rewards[t], 0.0);
                }
        }
    };
    train(r, env, o);
}

TEST(Train, ZeroLearningRateKeepsEvaluationConstant)
{
    auto env = make_env(ObjectiveKind::Joint);
    for (Mode m : kAllModes) {
        auto opt = small_options(2);
        opt.set_learning_rate(0.0);
        opt.sac.min_replay_size = 32;
        opt.sac.batch_size = 32;
        Roster r(m, ActionSpace::full(), opt);
        TrainOptions o;
        o.budget = 400;
        o.eval_interval = 100;
        auto curve = train(r, env, o);
        ASSERT_EQ(curve.size(), 5u);
        for (const auto& p : curve) EXPECT_EQ(p.mean_return, curve.front().mean_return) << to_string(m);
    }
}

TEST(Train, SameSeedSameCurve)
{
    auto env = make_env(ObjectiveKind::LowLatency);
    for (Mode m : kAllModes) {
        TrainOptions o;
        o.budget = 300;
        o.eval_interval = 50;
        Roster a(m, ActionSpace::full(), small_options(7));
        Roster b(m, ActionSpace::full(), small_options(7));
        auto ca = train(a, env, o);
        auto cb = train(b, env, o);
        ASSERT_EQ(ca.size(), cb.size());
        for (std::size_t i = 0; i < ca.size(); ++i) {
            EXPECT_EQ(ca[i].step, static_cast<std::int64_t>(i) * 50);
            EXPECT_EQ(ca[i].mean_return, cb[i].mean_return);
        }
        EXPECT_EQ(all_params(a), all_params(b));
    }
}

TEST(Train, MarlImprovesOverUniformPolicyOnLowPower)
{
    auto env = make_env(ObjectiveKind::LowPower);
    // Mean return of the uniform policy, estimated from random configs.
    std::mt19937_64 rng(1);
    double mean_reward = 0.0;
    const int n = 300;
    for (int i = 0; i < n; ++i) mean_reward += env.reward_for(env.space().decode(random_indices(env.space(), rng)));
    const double uniform_return = mean_reward / n * env.episode_len();
    AgentOptions opt;
    opt.seed = 0;
    Roster r(Mode::MarlPpo, ActionSpace::full(), opt);
    TrainOptions o;
    o.budget = 2048;
    o.eval_interval = 512;
    auto curve = train(r, env, o);
    EXPECT_GT(curve.back().mean_return, uniform_return);
}

TEST(Checkpoint, RoundTripRestoresEveryTensor)
{
    auto env = make_env(ObjectiveKind::Joint);
    for (Mode m : kAllModes) {
        auto opt = small_options(3);
        opt.sac.min_replay_size = 32;
        opt.sac.batch_size = 32;
        Roster a(m, ActionSpace::full(), opt);
        TrainOptions o;
        o.budget = 256;
        o.eval_interval = 256;
        train(a, env, o);
        auto text = checkpoint_to_string(a, 256);
        Roster b(m, ActionSpace::full(), small_options(99));
        EXPECT_NE(all_params(a), all_params(b));
        EXPECT_EQ(load_checkpoint(b, text), 256);
        EXPECT_EQ(all_params(a), all_params(b)) << to_string(m);
        EXPECT_EQ(checkpoint_to_string(b, 256), text);
        EXPECT_EQ(evaluate(a, env), evaluate(b, env));
    }
}

TEST(Checkpoint, RejectsMismatches)
{
    Roster marl(Mode::MarlPpo, ActionSpace::full(), small_options());
    Roster sarl(Mode::SarlPpo, ActionSpace::full(), small_options());
    auto text = checkpoint_to_string(marl, 0);
    EXPECT_THROW(load_checkpoint(sarl, text), Error);
    auto wide = small_options();
    wide.hidden = {32, 16};
    Roster other(Mode::MarlPpo, ActionSpace::full(), wide);
    try {
        load_checkpoint(other, text);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
    }
    EXPECT_THROW(load_checkpoint(marl, text.substr(0, text.size() / 2)), Error);
    EXPECT_THROW(load_checkpoint(marl, "garbage"), Error);
}

TEST(Checkpoint, EveryCurvePointIsReproducibleFromItsCheckpoint)
{
    auto env = make_env(ObjectiveKind::LowPower);
    for (Mode m : kAllModes) {
        auto opt = small_options(5);
        opt.sac.min_replay_size = 32;
        opt.sac.batch_size = 32;
        Roster r(m, ActionSpace::full(), opt);
        std::vector<std::pair<EvalPoint, std::string>> saved;
        TrainOptions o;
        o.budget = 300;
        o.eval_interval = 100;
        train(r, env, o, [&](const EvalPoint& p, const Roster& ro) { saved.emplace_back(p, checkpoint_to_string(ro, p.step)); });
        ASSERT_EQ(saved.size(), 4u);
        for (const auto& [p, text] : saved) {
            Roster fresh(m, ActionSpace::full(), opt);
            EXPECT_EQ(load_checkpoint(fresh, text), p.step);
            EXPECT_EQ(evaluate(fresh, env, o.eval_episodes), p.mean_return) << to_string(m) << " step " << p.step;
        }
    }
}

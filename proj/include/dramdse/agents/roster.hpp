#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dramdse/agents/ppo_agent.hpp"
#include "dramdse/agents/sac_agent.hpp"
#include "dramdse/agents/tdm.hpp"
#include "dramdse/env.hpp"

namespace dramdse::agents {

enum class Mode { MarlPpo, SarlPpo, SarlSac, TdmPpo };

inline constexpr std::array<Mode, 4> kAllModes{Mode::MarlPpo, Mode::SarlPpo, Mode::SarlSac, Mode::TdmPpo};

inline std::string to_string(Mode m)
{
    switch (m) {
    case Mode::MarlPpo: return "marl_ppo";
    case Mode::SarlPpo: return "sarl_ppo";
    case Mode::SarlSac: return "sarl_sac";
    case Mode::TdmPpo: return "tdm_ppo";
    }
    return "?";
}

inline Mode parse_mode(const std::string& s)
{
    for (Mode m : kAllModes)
        if (to_string(m) == s) return m;
    throw Error(ErrorKind::ConfigError, "unknown mode '" + s + "' (marl_ppo|sarl_ppo|sarl_sac|tdm_ppo)");
}

struct AgentOptions {
    std::vector<int> hidden{64, 64};
    learn::PpoHyper ppo;
    learn::SacHyper sac;
    std::uint64_t seed = 0;

    void set_learning_rate(double lr)
    {
        ppo.learning_rate = lr;
        sac.learning_rate = lr;
    }
};

/// Network inputs for the single-shot formulations: the observation scaled
/// by the default-config metrics, plus the fraction of the episode elapsed.
inline constexpr int kBanditFeatures = 4;
/// The time-multiplexed agent additionally sees a one-hot of its slot.
inline constexpr int kTdmFeatures = kBanditFeatures + kNumParams;

inline Vector bandit_features(const DramEnv& env, const Observation& o, int env_step)
{
    auto n = env.normalized(o);
    Vector x(kBanditFeatures);
    x << n[0], n[1], n[2], static_cast<double>(env_step) / env.episode_len();
    return x;
}

inline Vector tdm_features(const TdmEnv& tdm)
{
    const auto& env = tdm.env();
    Vector x = Vector::Zero(kTdmFeatures);
    x.head(kBanditFeatures) = bandit_features(env, env.last_observation(), env.step_count());
    x(kBanditFeatures + tdm.slot()) = 1.0;
    return x;
}

inline int input_dim(Mode m) { return m == Mode::TdmPpo ? kTdmFeatures : kBanditFeatures; }

/// The agents of one formulation and the factors each one owns.
///   MarlPpo: ten PPO agents, one factor each, independent networks.
///   SarlPpo / TdmPpo: one PPO agent with ten heads.
///   SarlSac: one SAC agent with ten heads.
class Roster {
public:
    Roster(Mode mode, const ActionSpace& space, const AgentOptions& opt) : mode_(mode), options_(opt)
    {
        const auto cards = space.cardinalities();
        auto seed_for = [&](int agent) {
            std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                              static_cast<std::uint32_t>(mode), static_cast<std::uint32_t>(agent)};
            std::array<std::uint32_t, 2> w{};
            seq.generate(w.begin(), w.end());
            return (std::uint64_t{w[0]} << 32) | w[1];
        };
        std::vector<int> all(kNumParams);
        std::vector<int> all_cards(kNumParams);
        for (int i = 0; i < kNumParams; ++i) {
            all[static_cast<std::size_t>(i)] = i;
            all_cards[static_cast<std::size_t>(i)] = cards[static_cast<std::size_t>(i)];
        }
        switch (mode) {
        case Mode::MarlPpo:
            for (int i = 0; i < kNumParams; ++i)
                ppo_.emplace_back(std::vector<int>{i}, std::vector<int>{cards[static_cast<std::size_t>(i)]},
                                  kBanditFeatures, opt.hidden, opt.ppo, seed_for(i));
            break;
        case Mode::SarlPpo:
        case Mode::TdmPpo:
            ppo_.emplace_back(all, all_cards, input_dim(mode), opt.hidden, opt.ppo, seed_for(0));
            break;
        case Mode::SarlSac: sac_.emplace(all_cards, kBanditFeatures, opt.hidden, opt.sac, seed_for(0)); break;
        }
    }

    Mode mode() const { return mode_; }
    const AgentOptions& options() const { return options_; }
    int num_agents() const { return sac_ ? 1 : static_cast<int>(ppo_.size()); }

    /// Factors owned by each agent; together a partition of 0..9.
    std::vector<std::vector<int>> ownership() const
    {
        if (sac_) {
            std::vector<int> all(kNumParams);
            for (int i = 0; i < kNumParams; ++i) all[static_cast<std::size_t>(i)] = i;
            return {all};
        }
        std::vector<std::vector<int>> out;
        for (const auto& a : ppo_) out.push_back(a.factors());
        return out;
    }

    std::vector<PpoAgent>& ppo_agents() { return ppo_; }
    const std::vector<PpoAgent>& ppo_agents() const { return ppo_; }
    SacAgent& sac() { return *sac_; }
    const SacAgent& sac() const { return *sac_; }

    /// Joint action for the single-shot modes (sampled or greedy). In MARL
    /// each agent decides from the same features with its own network and RNG.
    ActionIndices act(const Vector& x, bool greedy)
    {
        if (greedy) return act_greedy(x);
        ActionIndices a{};
        if (sac_) {
            auto c = sac_->sample(x);
            std::copy(c.begin(), c.end(), a.begin());
            return a;
        }
        require_single_shot();
        for (auto& ag : ppo_) scatter(ag, ag.sample(x), a);
        return a;
    }

    ActionIndices act_greedy(const Vector& x) const
    {
        ActionIndices a{};
        if (sac_) {
            auto c = sac_->greedy(x);
            std::copy(c.begin(), c.end(), a.begin());
            return a;
        }
        require_single_shot();
        for (const auto& ag : ppo_) scatter(ag, ag.greedy(x), a);
        return a;
    }

private:
    void require_single_shot() const
    {
        if (mode_ == Mode::TdmPpo)
            throw Error(ErrorKind::ConfigError, "the time-multiplexed agent acts one slot at a time");
    }

    static void scatter(const PpoAgent& ag, const PpoDecision& d, ActionIndices& a)
    {
        for (std::size_t h = 0; h < ag.factors().size(); ++h)
            a[static_cast<std::size_t>(ag.factors()[h])] = d.choice[h];
    }

    Mode mode_;
    AgentOptions options_;
    std::vector<PpoAgent> ppo_;
    std::optional<SacAgent> sac_;
};

/// Plays `episodes` greedy episodes on a copy of `env` and returns the mean
/// undiscounted return. Parameters, RNGs and `env` are left untouched.
inline double evaluate(const Roster& roster, const DramEnv& env, int episodes = 1)
{
    if (episodes < 1) throw Error(ErrorKind::ConfigError, "eval_episodes must be >= 1");
    double total = 0.0;
    for (int ep = 0; ep < episodes; ++ep) {
        if (roster.mode() == Mode::TdmPpo) {
            TdmEnv tdm(env);
            tdm.reset();
            const auto& agent = roster.ppo_agents().front();
            for (int k = 0; k < tdm.episode_agent_steps(); ++k) {
                const int f = tdm.factor();
                auto d = agent.greedy(tdm_features(tdm), f);
                total += tdm.step(d.choice[static_cast<std::size_t>(f)]).reward;
            }
        } else {
            DramEnv e(env);
            auto obs = e.reset();
            for (int t = 0; t < e.episode_len(); ++t) {
                auto tr = e.step(roster.act_greedy(bandit_features(e, obs, t)));
                total += tr.reward;
                obs = tr.next_observation;
            }
        }
    }
    return total / episodes;
}

} // namespace dramdse::agents

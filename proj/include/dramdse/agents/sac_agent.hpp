#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dramdse/learn/adam.hpp"
#include "dramdse/learn/categorical.hpp"
#include "dramdse/learn/mlp.hpp"
#include "dramdse/learn/replay.hpp"
#include "dramdse/learn/sac.hpp"

namespace dramdse::agents {

using learn::Matrix;
using learn::Vector;

struct SacRecord {
    Vector features;
    std::vector<int> action;
    double reward = 0.0;
    Vector next_features;
    bool done = false;
};

struct SacUpdateStats {
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double entropy = 0.0;
    double alpha = 0.0;
};

/// Discrete SAC over all owned factors: one actor with a categorical head per
/// factor, twin Q networks with one value block per head, and their
/// Polyak-averaged targets.
class SacAgent {
public:
    SacAgent(std::vector<int> cards, int input_dim, const std::vector<int>& hidden, const learn::SacHyper& hyper,
             std::uint64_t seed)
        : heads_(std::move(cards)), hyper_(hyper), rng_(seed),
          replay_(static_cast<std::size_t>(std::max(1, hyper.replay_capacity))), log_alpha_(hyper.initial_log_alpha)
    {
        std::vector<int> w{input_dim};
        for (int h : hidden) w.push_back(h);
        w.push_back(heads_.total());
        actor_ = learn::Mlp(w);
        q1_ = learn::Mlp(w);
        q2_ = learn::Mlp(w);
        actor_.init_orthogonal(rng_, std::sqrt(2.0), 0.01);
        q1_.init_orthogonal(rng_, std::sqrt(2.0), 1.0);
        q2_.init_orthogonal(rng_, std::sqrt(2.0), 1.0);
        tq1_ = q1_;
        tq2_ = q2_;
        actor_opt_ = learn::OptimState(actor_.num_params(), hyper_.learning_rate, hyper_.adam_epsilon);
        q1_opt_ = learn::OptimState(q1_.num_params(), hyper_.learning_rate, hyper_.adam_epsilon);
        q2_opt_ = learn::OptimState(q2_.num_params(), hyper_.learning_rate, hyper_.adam_epsilon);
        alpha_opt_ = learn::OptimState(1, hyper_.learning_rate, hyper_.adam_epsilon);
    }

    const learn::HeadLayout& heads() const { return heads_; }
    const learn::SacHyper& hyper() const { return hyper_; }
    learn::Mlp& actor() { return actor_; }
    const learn::Mlp& actor() const { return actor_; }
    learn::Mlp& q1() { return q1_; }
    const learn::Mlp& q1() const { return q1_; }
    learn::Mlp& q2() { return q2_; }
    const learn::Mlp& q2() const { return q2_; }
    learn::Mlp& target_q1() { return tq1_; }
    const learn::Mlp& target_q1() const { return tq1_; }
    learn::Mlp& target_q2() { return tq2_; }
    const learn::Mlp& target_q2() const { return tq2_; }
    double log_alpha() const { return log_alpha_; }
    void set_log_alpha(double v) { log_alpha_ = v; }
    std::size_t replay_size() const { return replay_.size(); }
    std::mt19937_64& rng() { return rng_; }

    std::vector<int> sample(const Vector& x) { return decide(x, &rng_); }
    std::vector<int> greedy(const Vector& x) const { return decide(x, nullptr); }

    /// Stores one transition and runs a gradient step every update_period
    /// calls once the buffer holds min_replay_size records.
    void observe(SacRecord rec)
    {
        replay_.push(std::move(rec));
        ++observed_;
        if (replay_.size() >= static_cast<std::size_t>(std::max(1, hyper_.min_replay_size)) &&
            observed_ % static_cast<std::uint64_t>(std::max(1, hyper_.update_period)) == 0)
            last_ = update();
    }

    const SacUpdateStats& last_update() const { return last_; }

    SacUpdateStats update()
    {
        auto idx = replay_.sample_indices(static_cast<std::size_t>(hyper_.batch_size), rng_);
        const int in = actor_.input_dim();
        const auto n = static_cast<Eigen::Index>(idx.size());
        learn::SacBatch b;
        b.features.resize(in, n);
        b.next_features.resize(in, n);
        b.actions.resize(heads_.num_heads(), n);
        for (Eigen::Index c = 0; c < n; ++c) {
            const auto& r = replay_[idx[static_cast<std::size_t>(c)]];
            b.features.col(c) = r.features;
            b.next_features.col(c) = r.next_features;
            for (int h = 0; h < heads_.num_heads(); ++h) b.actions(h, c) = r.action[static_cast<std::size_t>(h)];
            b.rewards.push_back(hyper_.reward_scale * r.reward);
            b.dones.push_back(r.done ? 1.0 : 0.0);
        }
        auto loss = learn::sac_discrete_loss(b, actor_, heads_, q1_, q2_, tq1_, tq2_, log_alpha_, hyper_.discount,
                                             hyper_.target_entropy);
        learn::adam_step(q1_opt_, q1_.params(), loss.q1_grad);
        learn::adam_step(q2_opt_, q2_.params(), loss.q2_grad);
        learn::adam_step(actor_opt_, actor_.params(), loss.actor_grad);
        std::vector<double> la{log_alpha_};
        std::vector<double> lg{loss.log_alpha_grad};
        learn::adam_step(alpha_opt_, la, lg);
        log_alpha_ = la[0];
        learn::polyak_update(tq1_.params(), q1_.params(), hyper_.tau);
        learn::polyak_update(tq2_.params(), q2_.params(), hyper_.tau);
        return {loss.critic_loss, loss.actor_loss, loss.entropy, std::exp(log_alpha_)};
    }

private:
    std::vector<int> decide(const Vector& x, std::mt19937_64* rng) const
    {
        Matrix logits = actor_.forward(x);
        std::vector<int> out(static_cast<std::size_t>(heads_.num_heads()));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int h = 0; h < heads_.num_heads(); ++h) {
            Vector lp = learn::log_softmax(logits.col(0).segment(heads_.offset(h), heads_.card(h)));
            out[static_cast<std::size_t>(h)] = rng ? learn::sample_from_logp(lp, unif(*rng)) : learn::argmax(lp);
        }
        return out;
    }

    learn::HeadLayout heads_;
    learn::SacHyper hyper_;
    std::mt19937_64 rng_;
    learn::ReplayBuffer<SacRecord> replay_;
    double log_alpha_;
    learn::Mlp actor_, q1_, q2_, tq1_, tq2_;
    learn::OptimState actor_opt_, q1_opt_, q2_opt_, alpha_opt_;
    std::uint64_t observed_ = 0;
    SacUpdateStats last_;
};

} // namespace dramdse::agents

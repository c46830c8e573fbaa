#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "dramdse/learn/adam.hpp"
#include "dramdse/learn/categorical.hpp"
#include "dramdse/learn/gae.hpp"
#include "dramdse/learn/mlp.hpp"
#include "dramdse/learn/ppo.hpp"

namespace dramdse::agents {

using learn::Matrix;
using learn::Vector;

/// One worker's unroll as seen by one agent. Actions hold only the agent's
/// own heads (-1 where a head did not act).
struct PpoSegment {
    std::vector<Vector> features;
    std::vector<std::vector<int>> actions;
    std::vector<double> logp;
    std::vector<double> values;
    std::vector<double> rewards;
    std::vector<std::uint8_t> dones;
    double bootstrap_value = 0.0;

    std::size_t size() const { return rewards.size(); }
};

struct PpoDecision {
    std::vector<int> choice; // per own head, -1 if not acting
    double logp = 0.0;       // summed over acting heads
    double value = 0.0;
};

struct PpoUpdateStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
};

/// Actor-critic pair owning a set of factors. The actor has one categorical
/// head per owned factor; the critic is a separate network.
class PpoAgent {
public:
    PpoAgent(std::vector<int> factors, std::vector<int> cards, int input_dim, const std::vector<int>& hidden,
             const learn::PpoHyper& hyper, std::uint64_t seed)
        : factors_(std::move(factors)), heads_(std::move(cards)), hyper_(hyper), rng_(seed)
    {
        std::vector<int> aw{input_dim}, cw{input_dim};
        for (int h : hidden) {
            aw.push_back(h);
            cw.push_back(h);
        }
        aw.push_back(heads_.total());
        cw.push_back(1);
        actor_ = learn::Mlp(aw);
        critic_ = learn::Mlp(cw);
        actor_.init_orthogonal(rng_, std::sqrt(2.0), 0.01);
        critic_.init_orthogonal(rng_, std::sqrt(2.0), 1.0);
        actor_opt_ = learn::OptimState(actor_.num_params(), hyper_.learning_rate, hyper_.adam_epsilon);
        critic_opt_ = learn::OptimState(critic_.num_params(), hyper_.learning_rate, hyper_.adam_epsilon);
    }

    const std::vector<int>& factors() const { return factors_; }
    const learn::HeadLayout& heads() const { return heads_; }
    const learn::PpoHyper& hyper() const { return hyper_; }
    learn::Mlp& actor() { return actor_; }
    const learn::Mlp& actor() const { return actor_; }
    learn::Mlp& critic() { return critic_; }
    const learn::Mlp& critic() const { return critic_; }
    std::mt19937_64& rng() { return rng_; }

    /// Samples every head, or only `only_head` when >= 0.
    PpoDecision sample(const Vector& x, int only_head = -1) { return decide(x, only_head, &rng_); }

    /// Per-head argmax; never touches the RNG or parameters.
    PpoDecision greedy(const Vector& x, int only_head = -1) const { return decide(x, only_head, nullptr); }

    double value(const Vector& x) const { return critic_.forward(x)(0, 0); }

    /// Per-head log-probabilities at x.
    std::vector<Vector> head_logp(const Vector& x) const
    {
        Matrix logits = actor_.forward(x);
        std::vector<Vector> out;
        for (int h = 0; h < heads_.num_heads(); ++h)
            out.push_back(learn::log_softmax(logits.col(0).segment(heads_.offset(h), heads_.card(h))));
        return out;
    }

    /// GAE per segment, then num_epochs passes of shuffled minibatches.
    PpoUpdateStats update(const std::vector<PpoSegment>& segments)
    {
        std::size_t n = 0;
        for (const auto& s : segments) n += s.size();
        PpoUpdateStats stats;
        if (n == 0) return stats;

        const int in = actor_.input_dim();
        Matrix feats(in, static_cast<Eigen::Index>(n));
        Eigen::MatrixXi acts(heads_.num_heads(), static_cast<Eigen::Index>(n));
        std::vector<double> old_logp, adv, ret;
        old_logp.reserve(n);
        adv.reserve(n);
        ret.reserve(n);
        Eigen::Index col = 0;
        for (const auto& s : segments) {
            auto g = learn::gae(s.rewards, s.values, s.dones, s.bootstrap_value, hyper_.discount, hyper_.gae_lambda);
            for (std::size_t t = 0; t < s.size(); ++t, ++col) {
                feats.col(col) = s.features[t];
                for (int h = 0; h < heads_.num_heads(); ++h) acts(h, col) = s.actions[t][static_cast<std::size_t>(h)];
                old_logp.push_back(s.logp[t]);
                adv.push_back(g.advantages[t]);
                ret.push_back(g.returns[t]);
            }
        }

        const std::size_t mbs = static_cast<std::size_t>(std::max(1, hyper_.num_minibatches));
        const std::size_t groups = std::min(mbs, n);
        std::vector<std::size_t> order(n);
        int passes = 0;
        for (int epoch = 0; epoch < hyper_.num_epochs; ++epoch) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::shuffle(order.begin(), order.end(), rng_);
            for (std::size_t g = 0; g < groups; ++g) {
                const std::size_t lo = g * n / groups, hi = (g + 1) * n / groups;
                learn::PpoBatch b;
                const auto m = static_cast<Eigen::Index>(hi - lo);
                b.features.resize(in, m);
                b.actions.resize(heads_.num_heads(), m);
                for (std::size_t k = lo; k < hi; ++k) {
                    const auto j = static_cast<Eigen::Index>(order[k]);
                    const auto c = static_cast<Eigen::Index>(k - lo);
                    b.features.col(c) = feats.col(j);
                    b.actions.col(c) = acts.col(j);
                    b.old_logp.push_back(old_logp[order[k]]);
                    b.advantages.push_back(adv[order[k]]);
                    b.returns.push_back(ret[order[k]]);
                }
                normalize(b.advantages);
                auto r = learn::ppo_loss(b, actor_, heads_, critic_, hyper_.clipping_epsilon, hyper_.entropy_cost,
                                         hyper_.value_cost);
                // Actor and critic are clipped separately: the value gradient
                // is orders of magnitude larger early on and would otherwise
                // scale the policy step to nothing.
                learn::clip_global_norm(r.actor_grad, hyper_.max_gradient_norm);
                learn::clip_global_norm(r.critic_grad, hyper_.max_gradient_norm);
                learn::adam_step(actor_opt_, actor_.params(), r.actor_grad);
                learn::adam_step(critic_opt_, critic_.params(), r.critic_grad);
                stats.policy_loss += r.policy_loss;
                stats.value_loss += r.value_loss;
                stats.entropy += r.entropy;
                stats.clip_fraction += r.clip_fraction;
                ++passes;
            }
        }
        if (passes > 0) {
            stats.policy_loss /= passes;
            stats.value_loss /= passes;
            stats.entropy /= passes;
            stats.clip_fraction /= passes;
        }
        return stats;
    }

private:
    static void normalize(std::vector<double>& a)
    {
        double mean = 0.0;
        for (double v : a) mean += v;
        mean /= static_cast<double>(a.size());
        double var = 0.0;
        for (double v : a) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / static_cast<double>(a.size()));
        for (double& v : a) v = (v - mean) / (sd + 1e-8);
    }

    PpoDecision decide(const Vector& x, int only_head, std::mt19937_64* rng) const
    {
        PpoDecision d;
        Matrix logits = actor_.forward(x);
        d.choice.assign(static_cast<std::size_t>(heads_.num_heads()), -1);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int h = 0; h < heads_.num_heads(); ++h) {
            if (only_head >= 0 && h != only_head) continue;
            Vector lp = learn::log_softmax(logits.col(0).segment(heads_.offset(h), heads_.card(h)));
            const int a = rng ? learn::sample_from_logp(lp, unif(*rng)) : learn::argmax(lp);
            d.choice[static_cast<std::size_t>(h)] = a;
            d.logp += lp(a);
        }
        d.value = value(x);
        return d;
    }

    std::vector<int> factors_;
    learn::HeadLayout heads_;
    learn::PpoHyper hyper_;
    std::mt19937_64 rng_;
    learn::Mlp actor_;
    learn::Mlp critic_;
    learn::OptimState actor_opt_;
    learn::OptimState critic_opt_;
};

} // namespace dramdse::agents

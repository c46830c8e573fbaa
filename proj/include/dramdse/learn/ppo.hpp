#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "dramdse/error.hpp"
#include "dramdse/learn/categorical.hpp"
#include "dramdse/learn/mlp.hpp"

namespace dramdse::learn {

/// Default values are the PPO column of the agents' hyperparameter table.
struct PpoHyper {
    int batch_size = 128; // transitions per learner update (= unroll_length * num_workers)
    double discount = 0.99;
    double learning_rate = 2e-4;
    double adam_epsilon = 1e-5;
    int num_minibatches = 32;
    int unroll_length = 16;
    int num_epochs = 5;
    bool clip_value = false;
    double clipping_epsilon = 0.2;
    double gae_lambda = 0.95;
    double entropy_cost = 0.01;
    double value_cost = 1.0;
    double max_gradient_norm = 0.5;
    // Dataflow knobs of a distributed learner; accepted and ignored here.
    int prefetch_size = 4;
    int variable_update_period = 1;

    int num_workers() const { return std::max(1, batch_size / std::max(1, unroll_length)); }
};

/// One minibatch. Columns are samples. `actions(h, b)` is the chosen index of
/// head h for sample b, or -1 when head h did not act on that sample.
struct PpoBatch {
    Matrix features;
    Eigen::MatrixXi actions;
    std::vector<double> old_logp;
    std::vector<double> advantages;
    std::vector<double> returns;

    int size() const { return static_cast<int>(features.cols()); }
};

struct PpoLossResult {
    double loss = 0.0;
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
    std::vector<double> actor_grad;
    std::vector<double> critic_grad;
};

/// Clipped-surrogate PPO loss with analytic gradients:
///
///   L = -mean(min(rho*A, clip(rho, 1-eps, 1+eps)*A))
///       + value_cost * mean((V - R)^2) - entropy_cost * mean(H)
///
/// rho = exp(logp_new - logp_old) with logp summed over the active heads, H
/// the summed entropy of the active heads. The value term is unclipped.
inline PpoLossResult ppo_loss(const PpoBatch& batch, const Mlp& actor, const HeadLayout& heads, const Mlp& critic,
                              double clipping_epsilon, double entropy_cost, double value_cost)
{
    const int n = batch.size();
    if (n == 0) throw Error(ErrorKind::LengthMismatch, "ppo_loss: empty batch");
    if (batch.actions.cols() != n || batch.actions.rows() != heads.num_heads() ||
        static_cast<int>(batch.old_logp.size()) != n || static_cast<int>(batch.advantages.size()) != n ||
        static_cast<int>(batch.returns.size()) != n)
        throw Error(ErrorKind::LengthMismatch, "ppo_loss: batch fields disagree in length");
    if (actor.output_dim() != heads.total() || critic.output_dim() != 1)
        throw Error(ErrorKind::ShapeMismatch, "ppo_loss: network outputs do not match heads");

    Mlp::Tape actor_tape, critic_tape;
    const Matrix logits = actor.forward(batch.features, &actor_tape);
    const Matrix values = critic.forward(batch.features, &critic_tape);

    PpoLossResult r;
    Matrix d_logits = Matrix::Zero(logits.rows(), n);
    Matrix d_values(1, n);
    const double inv_n = 1.0 / n;
    int clipped = 0;

    for (int b = 0; b < n; ++b) {
        double logp = 0.0;
        double ent = 0.0;
        std::vector<Eigen::VectorXd> head_logp(static_cast<std::size_t>(heads.num_heads()));
        for (int h = 0; h < heads.num_heads(); ++h) {
            const int a = batch.actions(h, b);
            if (a < 0) continue;
            auto lp = log_softmax(logits.col(b).segment(heads.offset(h), heads.card(h)));
            logp += lp(a);
            ent += entropy_from_logp(lp);
            head_logp[static_cast<std::size_t>(h)] = std::move(lp);
        }
        const double adv = batch.advantages[static_cast<std::size_t>(b)];
        const double ratio = std::exp(logp - batch.old_logp[static_cast<std::size_t>(b)]);
        const double clipped_ratio = std::clamp(ratio, 1.0 - clipping_epsilon, 1.0 + clipping_epsilon);
        const double s1 = ratio * adv;
        const double s2 = clipped_ratio * adv;
        if (s2 < s1) ++clipped;
        r.policy_loss -= std::min(s1, s2) * inv_n;
        r.entropy += ent * inv_n;

        // dL/dlogp for the surrogate; zero when the clipped branch is active.
        const double g_logp = s1 <= s2 ? -ratio * adv * inv_n : 0.0;
        for (int h = 0; h < heads.num_heads(); ++h) {
            const int a = batch.actions(h, b);
            if (a < 0) continue;
            const auto& lp = head_logp[static_cast<std::size_t>(h)];
            const Eigen::ArrayXd p = lp.array().exp();
            const double hh = -(p * lp.array()).sum();
            Eigen::ArrayXd d = -g_logp * p;
            d(a) += g_logp;
            // dH/dz = -p * (log p + H); the loss carries -entropy_cost * H / n.
            d += entropy_cost * inv_n * p * (lp.array() + hh);
            d_logits.col(b).segment(heads.offset(h), heads.card(h)) = d.matrix();
        }

        const double err = values(0, b) - batch.returns[static_cast<std::size_t>(b)];
        r.value_loss += err * err * inv_n;
        d_values(0, b) = value_cost * 2.0 * err * inv_n;
    }
    r.clip_fraction = static_cast<double>(clipped) * inv_n;
    r.loss = r.policy_loss + value_cost * r.value_loss - entropy_cost * r.entropy;
    if (!std::isfinite(r.loss)) throw Error(ErrorKind::NonFinite, "ppo_loss: non-finite loss");
    r.actor_grad = actor.backward(actor_tape, d_logits);
    r.critic_grad = critic.backward(critic_tape, d_values);
    return r;
}

} // namespace dramdse::learn

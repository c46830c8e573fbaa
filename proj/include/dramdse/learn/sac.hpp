#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "dramdse/error.hpp"
#include "dramdse/learn/categorical.hpp"
#include "dramdse/learn/mlp.hpp"

namespace dramdse::learn {

/// Defaults follow the SAC column of the agents' hyperparameter table.
/// `update_period` (environment steps per gradient step) and the replay size
/// are not in that table.
struct SacHyper {
    int batch_size = 256;
    double discount = 0.99;
    double learning_rate = 2e-4;
    double adam_epsilon = 1e-5;
    double reward_scale = 1.0;
    int n_step = 1;
    double target_entropy = 0.0;
    double tau = 0.005;
    double initial_log_alpha = 0.0;
    int update_period = 4;
    int replay_capacity = 100000;
    int min_replay_size = 256;
};

/// Replay minibatch; columns are samples, every head acts on every sample.
struct SacBatch {
    Matrix features;
    Matrix next_features;
    Eigen::MatrixXi actions; // heads x B
    std::vector<double> rewards;
    std::vector<double> dones; // 1.0 when the transition ended its episode

    int size() const { return static_cast<int>(features.cols()); }
};

struct SacLossResult {
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double alpha_loss = 0.0;
    double entropy = 0.0; // mean summed head entropy at `features`
    std::vector<double> q1_grad;
    std::vector<double> q2_grad;
    std::vector<double> actor_grad;
    double log_alpha_grad = 0.0;
};

/// Discrete soft actor-critic over a factored categorical action space.
/// Each Q network has one output block per head (the value of each choice of
/// that head); every head block regresses onto its own soft target
///
///   y_h = r + discount * (1 - done) * sum_a pi_h(a|s') [min(Qt1_h, Qt2_h)(s',a) - alpha log pi_h(a|s')]
///
/// computed exactly from the categorical actor (no sampling).
///   critic: sum_h mean_b 0.5 [(Q1_h(s,a_h) - y_h)^2 + (Q2_h(s,a_h) - y_h)^2]
///   actor:  mean_b sum_h sum_a pi_h(a|s) [alpha log pi_h(a|s) - min(Q1_h, Q2_h)(s,a)]
///   alpha:  mean_b log_alpha * (H(s) - target_entropy)
/// Gradients flow only into the network each term is named after.
inline SacLossResult sac_discrete_loss(const SacBatch& batch, const Mlp& actor, const HeadLayout& heads, const Mlp& q1,
                                       const Mlp& q2, const Mlp& target_q1, const Mlp& target_q2, double log_alpha,
                                       double discount, double target_entropy)
{
    const int n = batch.size();
    if (n == 0) throw Error(ErrorKind::LengthMismatch, "sac loss: empty batch");
    if (batch.next_features.cols() != n || batch.actions.cols() != n || batch.actions.rows() != heads.num_heads() ||
        static_cast<int>(batch.rewards.size()) != n || static_cast<int>(batch.dones.size()) != n)
        throw Error(ErrorKind::LengthMismatch, "sac loss: batch fields disagree in length");
    for (const Mlp* m : {&actor, &q1, &q2, &target_q1, &target_q2})
        if (m->output_dim() != heads.total())
            throw Error(ErrorKind::ShapeMismatch, "sac loss: network outputs do not match heads");

    const double alpha = std::exp(log_alpha);
    const double inv_n = 1.0 / n;

    const Matrix next_logits = actor.forward(batch.next_features);
    const Matrix tq1 = target_q1.forward(batch.next_features);
    const Matrix tq2 = target_q2.forward(batch.next_features);

    Mlp::Tape actor_tape, q1_tape, q2_tape;
    const Matrix logits = actor.forward(batch.features, &actor_tape);
    const Matrix q1v = q1.forward(batch.features, &q1_tape);
    const Matrix q2v = q2.forward(batch.features, &q2_tape);

    SacLossResult r;
    Matrix d_q1 = Matrix::Zero(q1v.rows(), n);
    Matrix d_q2 = Matrix::Zero(q2v.rows(), n);
    Matrix d_logits = Matrix::Zero(logits.rows(), n);

    for (int b = 0; b < n; ++b) {
        const double live = 1.0 - batch.dones[static_cast<std::size_t>(b)];
        double ent_b = 0.0;
        for (int h = 0; h < heads.num_heads(); ++h) {
            const int off = heads.offset(h);
            const int card = heads.card(h);

            const Eigen::VectorXd next_lp = log_softmax(next_logits.col(b).segment(off, card));
            const Eigen::ArrayXd next_p = next_lp.array().exp();
            const Eigen::ArrayXd next_min =
                tq1.col(b).segment(off, card).array().min(tq2.col(b).segment(off, card).array());
            const double soft_v = (next_p * (next_min - alpha * next_lp.array())).sum();
            const double y = batch.rewards[static_cast<std::size_t>(b)] + discount * live * soft_v;

            const int a = batch.actions(h, b);
            if (a < 0 || a >= card) throw Error(ErrorKind::IndexOutOfRange, "sac loss: action index out of range");
            const double e1 = q1v(off + a, b) - y;
            const double e2 = q2v(off + a, b) - y;
            r.critic_loss += 0.5 * (e1 * e1 + e2 * e2) * inv_n;
            d_q1(off + a, b) = e1 * inv_n;
            d_q2(off + a, b) = e2 * inv_n;

            const Eigen::VectorXd lp = log_softmax(logits.col(b).segment(off, card));
            const Eigen::ArrayXd p = lp.array().exp();
            const Eigen::ArrayXd qmin = q1v.col(b).segment(off, card).array().min(q2v.col(b).segment(off, card).array());
            const Eigen::ArrayXd f = alpha * lp.array() - qmin;
            const double ef = (p * f).sum();
            r.actor_loss += ef * inv_n;
            // d/dz_j sum_a p_a f_a (f depends on z only through alpha*log p,
            // whose contribution cancels) = p_j (f_j - E_p[f]).
            d_logits.col(b).segment(off, card) = (p * (f - ef) * inv_n).matrix();
            ent_b += -(p * lp.array()).sum();
        }
        r.entropy += ent_b * inv_n;
    }
    r.alpha_loss = log_alpha * (r.entropy - target_entropy);
    r.log_alpha_grad = r.entropy - target_entropy;
    if (!std::isfinite(r.critic_loss) || !std::isfinite(r.actor_loss))
        throw Error(ErrorKind::NonFinite, "sac loss: non-finite loss");
    r.q1_grad = q1.backward(q1_tape, d_q1);
    r.q2_grad = q2.backward(q2_tape, d_q2);
    r.actor_grad = actor.backward(actor_tape, d_logits);
    return r;
}

} // namespace dramdse::learn

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dramdse/error.hpp"

namespace dramdse::learn {

struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> returns; // advantages + values
};

/// Generalized advantage estimation over one unroll.
///
///   delta_t = r_t + discount * (1 - done_t) * V_{t+1} - V_t
///   A_t     = delta_t + discount * lambda * (1 - done_t) * A_{t+1}
///
/// V_T is `bootstrap_value` (the critic's estimate for the state after the
/// last step). done_t marks that step t ended its episode.
inline GaeResult gae(std::span<const double> rewards, std::span<const double> values,
                     std::span<const std::uint8_t> dones, double bootstrap_value, double discount, double gae_lambda)
{
    const std::size_t n = rewards.size();
    if (values.size() != n || dones.size() != n)
        throw Error(ErrorKind::LengthMismatch, "gae: rewards, values and dones must have equal length");
    GaeResult out;
    out.advantages.assign(n, 0.0);
    out.returns.assign(n, 0.0);
    double next_adv = 0.0;
    double next_value = bootstrap_value;
    for (std::size_t k = n; k-- > 0;) {
        const double live = dones[k] ? 0.0 : 1.0;
        const double delta = rewards[k] + discount * live * next_value - values[k];
        next_adv = delta + discount * gae_lambda * live * next_adv;
        out.advantages[k] = next_adv;
        out.returns[k] = next_adv + values[k];
        next_value = values[k];
    }
    return out;
}

} // namespace dramdse::learn

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dramdse/error.hpp"

namespace dramdse::learn {

struct OptimState {
    std::vector<double> m;
    std::vector<double> v;
    long long step = 0;
    double learning_rate = 2e-4;
    double adam_epsilon = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;

    OptimState() = default;
    OptimState(std::size_t n, double lr, double eps = 1e-5) : m(n, 0.0), v(n, 0.0), learning_rate(lr), adam_epsilon(eps) {}
};

/// Adam with bias correction, applied in place.
inline void adam_step(OptimState& s, std::span<double> params, std::span<const double> grads)
{
    if (params.size() != grads.size() || s.m.size() != params.size() || s.v.size() != params.size())
        throw Error(ErrorKind::ShapeMismatch, "adam: parameter, gradient and moment sizes differ");
    ++s.step;
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
    const auto n = static_cast<Eigen::Index>(params.size());
    Eigen::Map<Eigen::ArrayXd> p(params.data(), n), m(s.m.data(), n), v(s.v.data(), n);
    Eigen::Map<const Eigen::ArrayXd> g(grads.data(), n);
    m = s.beta1 * m + (1.0 - s.beta1) * g;
    v = s.beta2 * v + (1.0 - s.beta2) * g * g;
    p -= s.learning_rate * (m / c1) / ((v / c2).sqrt() + s.adam_epsilon);
}

} // namespace dramdse::learn

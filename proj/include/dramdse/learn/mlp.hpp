#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dramdse/error.hpp"

namespace dramdse::learn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using ConstVectorMap = Eigen::Map<const Vector>;

/// Fully connected tanh network with a linear output layer. All weights
/// live in one flat vector (per layer: W as out x in column-major, then b),
/// which is what the optimizer, gradient clipping and checkpoints see.
/// Samples are columns: forward() maps (in x B) to (out x B).
class Mlp {
public:
    Mlp() = default;

    explicit Mlp(std::vector<int> widths) : widths_(std::move(widths))
    {
        if (widths_.size() < 2) throw Error(ErrorKind::ShapeMismatch, "mlp needs at least input and output widths");
        std::size_t n = 0;
        for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
            if (widths_[l] < 1 || widths_[l + 1] < 1) throw Error(ErrorKind::ShapeMismatch, "layer width must be >= 1");
            offsets_.push_back(n);
            n += static_cast<std::size_t>(widths_[l + 1]) * static_cast<std::size_t>(widths_[l] + 1);
        }
        params_.assign(n, 0.0);
    }

    /// Activations kept by forward() for backward().
    struct Tape {
        std::vector<Matrix> acts; // acts[0] = input, acts[l] = output of layer l-1
    };

    int input_dim() const { return widths_.front(); }
    int output_dim() const { return widths_.back(); }
    int num_layers() const { return static_cast<int>(widths_.size()) - 1; }
    const std::vector<int>& widths() const { return widths_; }
    std::size_t num_params() const { return params_.size(); }

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    ConstMatrixMap weight(int l) const
    {
        return {params_.data() + offsets_[static_cast<std::size_t>(l)], widths_[static_cast<std::size_t>(l) + 1],
                widths_[static_cast<std::size_t>(l)]};
    }
    MatrixMap weight(int l)
    {
        return {params_.data() + offsets_[static_cast<std::size_t>(l)], widths_[static_cast<std::size_t>(l) + 1],
                widths_[static_cast<std::size_t>(l)]};
    }
    ConstVectorMap bias(int l) const
    {
        auto off = offsets_[static_cast<std::size_t>(l)] +
                   static_cast<std::size_t>(widths_[static_cast<std::size_t>(l) + 1] * widths_[static_cast<std::size_t>(l)]);
        return {params_.data() + off, widths_[static_cast<std::size_t>(l) + 1]};
    }

    /// Orthogonal init (QR of a Gaussian matrix) scaled by `hidden_gain` on
    /// hidden layers and `output_gain` on the last layer; biases zero.
    void init_orthogonal(std::mt19937_64& rng, double hidden_gain, double output_gain)
    {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int l = 0; l < num_layers(); ++l) {
            const int rows = widths_[static_cast<std::size_t>(l) + 1];
            const int cols = widths_[static_cast<std::size_t>(l)];
            const int big = std::max(rows, cols);
            const int small = std::min(rows, cols);
            Matrix g(big, small);
            for (int j = 0; j < small; ++j)
                for (int i = 0; i < big; ++i) g(i, j) = normal(rng);
            Eigen::HouseholderQR<Matrix> qr(g);
            Matrix q = qr.householderQ() * Matrix::Identity(big, small);
            // Sign fix makes the draw uniform over orthogonal matrices.
            Matrix r = qr.matrixQR().topRows(small);
            for (int j = 0; j < small; ++j)
                if (r(j, j) < 0) q.col(j) *= -1.0;
            const double gain = l + 1 == num_layers() ? output_gain : hidden_gain;
            auto w = weight(l);
            if (rows >= cols)
                w = gain * q;
            else
                w = gain * q.transpose();
            auto off = offsets_[static_cast<std::size_t>(l)] + static_cast<std::size_t>(rows * cols);
            std::fill(params_.begin() + static_cast<std::ptrdiff_t>(off),
                      params_.begin() + static_cast<std::ptrdiff_t>(off) + rows, 0.0);
        }
    }

    Matrix forward(const Matrix& x, Tape* tape = nullptr) const
    {
        if (x.rows() != input_dim())
            throw Error(ErrorKind::ShapeMismatch, "mlp input has " + std::to_string(x.rows()) + " rows, expected " +
                                                      std::to_string(input_dim()));
        Matrix h = x;
        if (tape) {
            tape->acts.clear();
            tape->acts.push_back(h);
        }
        for (int l = 0; l < num_layers(); ++l) {
            Matrix z = weight(l) * h;
            z.colwise() += bias(l);
            if (l + 1 < num_layers()) z = z.array().tanh().matrix();
            h = std::move(z);
            if (tape) tape->acts.push_back(h);
        }
        if (!h.allFinite()) throw Error(ErrorKind::NonFinite, "non-finite network output");
        return h;
    }

    /// Gradient of a scalar loss w.r.t. all parameters given dLoss/dOutput.
    std::vector<double> backward(const Tape& tape, const Matrix& d_out) const
    {
        std::vector<double> grad(params_.size(), 0.0);
        Matrix dz = d_out;
        for (int l = num_layers() - 1; l >= 0; --l) {
            const Matrix& a_in = tape.acts[static_cast<std::size_t>(l)];
            const int rows = widths_[static_cast<std::size_t>(l) + 1];
            const int cols = widths_[static_cast<std::size_t>(l)];
            auto off = offsets_[static_cast<std::size_t>(l)];
            MatrixMap dw(grad.data() + off, rows, cols);
            dw.noalias() = dz * a_in.transpose();
            Eigen::Map<Vector> db(grad.data() + off + static_cast<std::size_t>(rows * cols), rows);
            db = dz.rowwise().sum();
            if (l > 0) {
                Matrix da = weight(l).transpose() * dz;
                dz = (da.array() * (1.0 - a_in.array().square())).matrix();
            }
        }
        return grad;
    }

private:
    std::vector<int> widths_;
    std::vector<std::size_t> offsets_;
    std::vector<double> params_;
};

/// Scales `grads` in place so their joint L2 norm is at most max_norm.
/// Returns the norm before clipping.
inline double clip_global_norm(std::span<double> grads, double max_norm)
{
    double sq = 0.0;
    for (double g : grads) sq += g * g;
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        const double s = max_norm / norm;
        for (double& g : grads) g *= s;
    }
    return norm;
}

/// Polyak averaging: target <- (1 - tau) * target + tau * online.
inline void polyak_update(std::vector<double>& target, const std::vector<double>& online, double tau)
{
    if (target.size() != online.size()) throw Error(ErrorKind::ShapeMismatch, "polyak: parameter sizes differ");
    for (std::size_t i = 0; i < target.size(); ++i) target[i] = (1.0 - tau) * target[i] + tau * online[i];
}

} // namespace dramdse::learn

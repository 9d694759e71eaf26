#pragma once

// Derivative machinery for the surrogate network.
//
// * net_jets: per-point second-order forward jets of the network outputs with
//   respect to its inputs (generic Jet2 arithmetic).
// * JetBatch: the same jets for a whole batch of points, layer by layer, with
//   an exact reverse sweep through the jet recurrences. Given adjoints of the
//   output channels it accumulates d(loss)/d(params) in flat order.
//
// Channels of a batch: 0 = value, 1 + k = d/d(input k) for every input k,
// 1 + inputs + s = d^2/d(input s)^2 for the first `second` inputs.

#include "wildfire/jet.hpp"
#include "wildfire/net.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace wildfire {

/// Jets of every raw network output at one input point; all inputs are tagged.
template <std::size_t N>
std::vector<Jet2<N>> net_jets(const MlpParams& p, std::span<const double> input)
{
    if (input.size() != N || static_cast<std::size_t>(p.arch.inputs()) != N)
        throw DimensionError("net_jets: input length does not match the architecture");
    std::vector<Jet2<N>> h;
    for (std::size_t k = 0; k < N; ++k)
        h.push_back(Jet2<N>::variable(input[k], k));
    const std::size_t last = p.arch.layers() - 1;
    for (std::size_t l = 0; l <= last; ++l) {
        const auto w = p.weight(l);
        const auto b = p.bias(l);
        std::vector<Jet2<N>> z(static_cast<std::size_t>(w.rows()));
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            Jet2<N> acc(b(r));
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                acc += w(r, c) * h[static_cast<std::size_t>(c)];
            z[static_cast<std::size_t>(r)] = (l < last || p.arch.output == Activation::sigmoid) ? sigmoid(acc) : acc;
        }
        h = std::move(z);
    }
    return h;
}

class JetBatch {
  public:
    int inputs() const { return inputs_; }
    int second() const { return second_; }
    int channels() const { return 1 + inputs_ + second_; }
    Eigen::Index points() const { return points_; }

    /// Evaluates all channels for the columns of `x` (inputs x points).
    /// Pure second derivatives are propagated for the first `second` inputs.
    void forward(const MlpParams& p, const Eigen::MatrixXd& x, int second)
    {
        inputs_ = p.arch.inputs();
        second_ = second;
        points_ = x.cols();
        input_ = x;
        if (x.rows() != inputs_ || second < 0 || second > inputs_)
            throw DimensionError("JetBatch: input matrix does not match the architecture");
        const std::size_t nl = p.arch.layers();
        const int nc = channels();
        layers_.resize(nl);
        Eigen::MatrixXd ones_row = Eigen::RowVectorXd::Ones(points_);

        for (std::size_t l = 0; l < nl; ++l) {
            Layer& L = layers_[l];
            const auto w = p.weight(l);
            const auto b = p.bias(l);
            L.activated = l + 1 < nl || p.arch.output == Activation::sigmoid;
            L.z.resize(static_cast<std::size_t>(nc));
            if (l == 0) {
                L.z[0].noalias() = w * x;
                L.z[0].colwise() += Eigen::VectorXd(b);
                for (int k = 0; k < inputs_; ++k)
                    L.z[static_cast<std::size_t>(1 + k)] = w.col(k) * ones_row;
                for (int s = 0; s < second_; ++s)
                    L.z[static_cast<std::size_t>(1 + inputs_ + s)].setZero(w.rows(), points_);
            } else {
                const auto& h = layers_[l - 1].a;
                L.z[0].noalias() = w * h[0];
                L.z[0].colwise() += Eigen::VectorXd(b);
                for (int c = 1; c < nc; ++c)
                    L.z[static_cast<std::size_t>(c)].noalias() = w * h[static_cast<std::size_t>(c)];
            }

            L.a.resize(static_cast<std::size_t>(nc));
            if (!L.activated) {
                L.a = L.z;
                continue;
            }
            L.s = L.z[0].array().unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); }).matrix();
            L.s1 = (L.s.array() * (1.0 - L.s.array())).matrix();
            L.s2 = (L.s1.array() * (1.0 - 2.0 * L.s.array())).matrix();
            L.a[0] = L.s;
            for (int k = 0; k < inputs_; ++k)
                L.a[static_cast<std::size_t>(1 + k)] = (L.s1.array() * L.z[static_cast<std::size_t>(1 + k)].array()).matrix();
            for (int s = 0; s < second_; ++s) {
                const auto& zk = L.z[static_cast<std::size_t>(1 + s)].array();
                const auto& zkk = L.z[static_cast<std::size_t>(1 + inputs_ + s)].array();
                L.a[static_cast<std::size_t>(1 + inputs_ + s)] =
                    (L.s2.array() * zk * zk + L.s1.array() * zkk).matrix();
            }
        }
    }

    /// Output channel c, (outputs x points).
    const Eigen::MatrixXd& output(int c) const { return layers_.back().a[static_cast<std::size_t>(c)]; }

    /// Accumulates into `grad` (flat parameter order) the gradient of a scalar
    /// whose adjoints with respect to the output channels are `adj`.
    void backward(const MlpParams& p, std::vector<Eigen::MatrixXd> adj, std::span<double> grad) const
    {
        const int nc = channels();
        if (adj.size() != static_cast<std::size_t>(nc))
            throw DimensionError("JetBatch::backward: need one adjoint per channel");
        if (grad.size() != p.flat.size())
            throw DimensionError("JetBatch::backward: gradient length mismatch");
        const std::size_t nl = layers_.size();
        for (std::size_t li = nl; li-- > 0;) {
            const Layer& L = layers_[li];
            // adj holds adjoints of this layer's activations; turn them into
            // adjoints of the pre-activations.
            if (L.activated)
                adj = activation_adjoint(L, adj);

            Eigen::Map<RowMajorMatrix> gw(grad.data() + p.weight_offset(li), p.arch.widths[li + 1], p.arch.widths[li]);
            Eigen::Map<Eigen::VectorXd> gb(grad.data() + p.bias_offset(li), p.arch.widths[li + 1]);
            gb += adj[0].rowwise().sum();
            if (li == 0) {
                gw.noalias() += adj[0] * input_.transpose();
                for (int k = 0; k < inputs_; ++k)
                    gw.col(k) += adj[static_cast<std::size_t>(1 + k)].rowwise().sum();
                break;
            }
            const auto& h = layers_[li - 1].a;
            const auto w = p.weight(li);
            std::vector<Eigen::MatrixXd> next(static_cast<std::size_t>(nc));
            for (int c = 0; c < nc; ++c) {
                gw.noalias() += adj[static_cast<std::size_t>(c)] * h[static_cast<std::size_t>(c)].transpose();
                next[static_cast<std::size_t>(c)].noalias() = w.transpose() * adj[static_cast<std::size_t>(c)];
            }
            adj = std::move(next);
        }
    }

  private:
    struct Layer {
        bool activated = true;
        std::vector<Eigen::MatrixXd> z; ///< pre-activation channels
        std::vector<Eigen::MatrixXd> a; ///< post-activation channels
        Eigen::MatrixXd s, s1, s2;      ///< sigma and its first two derivatives at z[0]
    };

    std::vector<Eigen::MatrixXd> activation_adjoint(const Layer& L, const std::vector<Eigen::MatrixXd>& adj) const
    {
        // a0 = s(z0); a_k = s1 z_k; a_kk = s2 z_k^2 + s1 z_kk
        const auto s = L.s.array();
        const auto s1 = L.s1.array();
        const auto s2 = L.s2.array();
        const Eigen::ArrayXXd s3 = s2 * (1.0 - 2.0 * s) - 2.0 * s1 * s1;
        std::vector<Eigen::MatrixXd> out(adj.size());
        Eigen::ArrayXXd g0 = adj[0].array() * s1;
        for (int k = 0; k < inputs_; ++k) {
            const auto ak = adj[static_cast<std::size_t>(1 + k)].array();
            const auto zk = L.z[static_cast<std::size_t>(1 + k)].array();
            g0 += ak * s2 * zk;
            out[static_cast<std::size_t>(1 + k)] = (ak * s1).matrix();
        }
        for (int sd = 0; sd < second_; ++sd) {
            const auto akk = adj[static_cast<std::size_t>(1 + inputs_ + sd)].array();
            const auto zk = L.z[static_cast<std::size_t>(1 + sd)].array();
            const auto zkk = L.z[static_cast<std::size_t>(1 + inputs_ + sd)].array();
            g0 += akk * (s3 * zk * zk + s2 * zkk);
            out[static_cast<std::size_t>(1 + sd)].array() += 2.0 * akk * s2 * zk;
            out[static_cast<std::size_t>(1 + inputs_ + sd)] = (akk * s1).matrix();
        }
        out[0] = g0.matrix();
        return out;
    }

    int inputs_ = 0;
    int second_ = 0;
    Eigen::Index points_ = 0;
    std::vector<Layer> layers_;
    Eigen::MatrixXd input_;
};

} // namespace wildfire

// SPDX-License-Identifier: Apache-2.0

#include "iclsel/attention.hpp"

#include <string>

namespace iclsel {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct LinearAttentionICL::Trace {
    std::vector<RowMatrix> tokens;  // tokens[l] is the input to layer l; back() is the output
    std::vector<Matrix> attention;  // A_l
    double normalizer = 1.0;
};

LinearAttentionICL::LinearAttentionICL(std::size_t d_in, std::size_t d_out,
                                       std::vector<AttentionLayer> layers, Matrix readout,
                                       bool trained)
    : d_in_(d_in), d_out_(d_out), layers_(std::move(layers)), readout_(std::move(readout)),
      trained_(trained) {
    const auto t = static_cast<Eigen::Index>(token_dim());
    if (d_in == 0 || d_out == 0) throw ValidationError("attention model needs d_in, d_out >= 1");
    for (const auto& layer : layers_) {
        if (layer.value.rows() != t || layer.value.cols() != t || layer.key_query.rows() != t ||
            layer.key_query.cols() != t) {
            throw DimensionMismatch("attention layer matrices must be token_dim x token_dim");
        }
        if (!layer.value.allFinite() || !layer.key_query.allFinite()) {
            throw ValidationError("attention layer has non-finite weights");
        }
    }
    if (readout_.rows() != static_cast<Eigen::Index>(d_out) || readout_.cols() != t) {
        throw DimensionMismatch("attention readout must be d_out x token_dim");
    }
}

LinearAttentionICL LinearAttentionICL::descent_init(std::size_t d_in, std::size_t d_out,
                                                    std::size_t n_layers, double x_step,
                                                    double y_step) {
    const auto t = static_cast<Eigen::Index>(d_in + d_out + 1);
    const auto di = static_cast<Eigen::Index>(d_in);
    const auto dout = static_cast<Eigen::Index>(d_out);
    std::vector<AttentionLayer> layers;
    for (std::size_t l = 0; l < n_layers; ++l) {
        AttentionLayer layer{Matrix::Zero(t, t), Matrix::Zero(t, t)};
        layer.key_query.topLeftCorner(di, di).setIdentity();
        layer.value.topLeftCorner(di, di) = -x_step * Matrix::Identity(di, di);
        layer.value.block(di, di, dout, dout) = -y_step * Matrix::Identity(dout, dout);
        layers.push_back(std::move(layer));
    }
    Matrix readout = Matrix::Zero(dout, t);
    readout.block(0, di, dout, dout) = -Matrix::Identity(dout, dout);
    return LinearAttentionICL(d_in, d_out, std::move(layers), std::move(readout), false);
}

void LinearAttentionICL::check_input(const Vector& emb) const {
    const auto t = token_dim();
    const auto n = static_cast<std::size_t>(emb.size());
    if (n % t != 0 || n / t < 2) {
        throw DimensionMismatch("embedding of length " + std::to_string(n) +
                                " is not a whole number (>= 2) of tokens of width " +
                                std::to_string(t));
    }
}

LinearAttentionICL::Trace LinearAttentionICL::run(const Vector& emb) const {
    check_input(emb);
    const auto t = static_cast<Eigen::Index>(token_dim());
    const Eigen::Index n = emb.size() / t;
    Trace tr;
    tr.tokens.reserve(layers_.size() + 1);
    tr.tokens.emplace_back(Eigen::Map<const RowMatrix>(emb.data(), n, t));
    tr.normalizer = 1.0 + tr.tokens.front().col(t - 1).head(n - 1).sum();
    for (const auto& layer : layers_) {
        const RowMatrix& z = tr.tokens.back();
        const auto demos = z.topRows(n - 1);
        Matrix a = demos.transpose() * demos / tr.normalizer;
        RowMatrix kq = z * layer.key_query.transpose();
        RowMatrix next = z + kq * a * layer.value.transpose();
        tr.attention.push_back(std::move(a));
        tr.tokens.push_back(std::move(next));
    }
    return tr;
}

Vector LinearAttentionICL::forward(const Vector& emb) const {
    const Trace tr = run(emb);
    const RowMatrix& z = tr.tokens.back();
    return readout_ * z.row(z.rows() - 1).transpose();
}

Vector LinearAttentionICL::backprop(const Vector& emb, const Vector& out_adjoint,
                                    Gradients* grads) const {
    const Trace tr = run(emb);
    const auto t = static_cast<Eigen::Index>(token_dim());
    const Eigen::Index n = emb.size() / t;
    const double inv_n = 1.0 / tr.normalizer;

    RowMatrix g = RowMatrix::Zero(n, t);
    g.row(n - 1) = (readout_.transpose() * out_adjoint).transpose();
    if (grads) grads->readout += out_adjoint * tr.tokens.back().row(n - 1);

    double d_normalizer = 0.0;
    for (std::size_t li = layers_.size(); li-- > 0;) {
        const auto& layer = layers_[li];
        const RowMatrix& z = tr.tokens[li];
        const Matrix& a = tr.attention[li];
        const RowMatrix kq = z * layer.key_query.transpose();  // rows (Q z_i)^T
        const RowMatrix u = g * layer.value;                   // rows (V^T g_i)^T
        const Matrix d_a = u.transpose() * kq;
        const RowMatrix d_kq = u * a;
        if (grads) {
            grads->layers[li].value += g.transpose() * (kq * a);
            grads->layers[li].key_query += d_kq.transpose() * z;
        }
        RowMatrix d_z = g + d_kq * layer.key_query;
        const Matrix sym = d_a + d_a.transpose();
        d_z.topRows(n - 1) += z.topRows(n - 1) * sym * inv_n;
        d_normalizer -= d_a.cwiseProduct(a).sum() * inv_n;
        g = std::move(d_z);
    }
    g.col(t - 1).head(n - 1).array() += d_normalizer;
    return Eigen::Map<const Vector>(g.data(), g.size());
}

Matrix LinearAttentionICL::input_gradient(const Vector& emb) const {
    Matrix out(static_cast<Eigen::Index>(d_out_), emb.size());
    for (Eigen::Index j = 0; j < out.rows(); ++j) {
        out.row(j) = backprop(emb, Vector::Unit(out.rows(), j), nullptr).transpose();
    }
    return out;
}

Matrix LinearAttentionICL::query_map(const Vector& emb) const {
    const Trace tr = run(emb);
    const auto t = static_cast<Eigen::Index>(token_dim());
    Matrix m = readout_;
    for (std::size_t li = layers_.size(); li-- > 0;) {
        const auto& layer = layers_[li];
        m = m * (Matrix::Identity(t, t) + layer.value * tr.attention[li] * layer.key_query);
    }
    return m;
}

double LinearAttentionICL::accumulate_squared_error(const Vector& emb, const Vector& target,
                                                    Gradients& grads) const {
    const Vector residual = forward(emb) - target;
    backprop(emb, residual, &grads);
    return 0.5 * residual.squaredNorm();
}

void LinearAttentionICL::Gradients::set_zero_like(const LinearAttentionICL& model) {
    layers.clear();
    for (const auto& l : model.layers()) {
        layers.push_back({Matrix::Zero(l.value.rows(), l.value.cols()),
                          Matrix::Zero(l.key_query.rows(), l.key_query.cols())});
    }
    readout = Matrix::Zero(model.readout().rows(), model.readout().cols());
}

double LinearAttentionICL::Gradients::squared_norm() const {
    double s = readout.squaredNorm();
    for (const auto& l : layers) s += l.value.squaredNorm() + l.key_query.squaredNorm();
    return s;
}

void LinearAttentionICL::Gradients::scale(double s) {
    readout *= s;
    for (auto& l : layers) {
        l.value *= s;
        l.key_query *= s;
    }
}

}  // namespace iclsel

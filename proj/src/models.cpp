// SPDX-License-Identifier: Apache-2.0

#include "iclsel/models.hpp"

#include <cmath>
#include <string>

namespace iclsel {

namespace {

void require_length(const Vector& emb, std::size_t expected, std::string_view who) {
    if (static_cast<std::size_t>(emb.size()) != expected) {
        throw DimensionMismatch(std::string(who) + ": embedding length " +
                                std::to_string(emb.size()) + " != " + std::to_string(expected));
    }
}

}  // namespace

AffineModel::AffineModel(Matrix W_, Vector b_) : W(std::move(W_)), b(std::move(b_)) {
    if (W.rows() != b.size()) throw DimensionMismatch("affine model: W rows != b length");
    if (!W.allFinite() || !b.allFinite()) throw ValidationError("affine model: non-finite weights");
}

Vector AffineModel::forward(const Vector& emb) const {
    require_length(emb, input_dim(), "affine model");
    return W * emb + b;
}

Matrix AffineModel::input_gradient(const Vector& emb) const {
    require_length(emb, input_dim(), "affine model");
    return W;
}

TwoLayerReLU::TwoLayerReLU(Matrix W1_, Vector b1_, Matrix W2_, Vector b2_)
    : W1(std::move(W1_)), b1(std::move(b1_)), W2(std::move(W2_)), b2(std::move(b2_)) {
    if (W1.rows() == 0) throw ValidationError("relu model: hidden width must be >= 1");
    if (W1.rows() != b1.size() || W2.cols() != W1.rows() || W2.rows() != b2.size()) {
        throw DimensionMismatch("relu model: inconsistent layer shapes");
    }
    if (!W1.allFinite() || !b1.allFinite() || !W2.allFinite() || !b2.allFinite()) {
        throw ValidationError("relu model: non-finite weights");
    }
}

TwoLayerReLU TwoLayerReLU::random(std::size_t d_emb, std::size_t hidden, std::size_t d_out,
                                  Rng& rng, double scale, double bias_scale) {
    Matrix w1 = rng.normal_matrix(hidden, d_emb, scale / std::sqrt(static_cast<double>(d_emb)));
    Vector b1 = rng.normal_vector(hidden, bias_scale);
    Matrix w2 = rng.normal_matrix(d_out, hidden, scale / std::sqrt(static_cast<double>(hidden)));
    Vector b2 = rng.normal_vector(d_out, bias_scale);
    return TwoLayerReLU(std::move(w1), std::move(b1), std::move(w2), std::move(b2));
}

Vector TwoLayerReLU::forward(const Vector& emb) const {
    require_length(emb, input_dim(), "relu model");
    const Vector h = (W1 * emb + b1).cwiseMax(0.0);
    return W2 * h + b2;
}

Matrix TwoLayerReLU::input_gradient(const Vector& emb) const {
    require_length(emb, input_dim(), "relu model");
    const Vector pre = W1 * emb + b1;
    const Vector active = (pre.array() > 0.0).cast<double>().matrix();
    return W2 * active.asDiagonal() * W1;
}

ModelOutput forward(const Model& model, const Vector& emb) {
    return std::visit([&](const auto& m) -> Vector { return m.forward(emb); }, model);
}

InputGradient input_gradient(const Model& model, const Vector& emb) {
    return std::visit([&](const auto& m) -> Matrix { return m.input_gradient(emb); }, model);
}

std::size_t output_dim(const Model& model) {
    struct {
        std::size_t operator()(const AffineModel& m) const { return m.output_dim(); }
        std::size_t operator()(const TwoLayerReLU& m) const { return m.output_dim(); }
        std::size_t operator()(const LinearAttentionICL& m) const { return m.d_out(); }
    } v;
    return std::visit(v, model);
}

std::string_view model_kind(const Model& model) {
    struct {
        std::string_view operator()(const AffineModel&) const { return "affine"; }
        std::string_view operator()(const TwoLayerReLU&) const { return "relu2"; }
        std::string_view operator()(const LinearAttentionICL&) const { return "linear_attention"; }
    } v;
    return std::visit(v, model);
}

double loss_of_estimate(LossKind kind, double estimate, double y) {
    switch (kind) {
    case LossKind::SquaredError: return (estimate - y) * (estimate - y);
    case LossKind::Logistic: {
        if (y != 0.0 && y != 1.0) throw ValidationError("logistic loss needs a label in {0, 1}");
        // softplus(-margin), written to stay finite for large |margin|
        const double margin = (2.0 * y - 1.0) * estimate;
        return margin > 0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
    }
    }
    return 0.0;
}

double loss(LossKind kind, const Vector& pred, const Vector& y) {
    if (pred.size() != y.size()) throw DimensionMismatch("loss: prediction/label length mismatch");
    if (kind == LossKind::SquaredError) return (pred - y).squaredNorm();
    if (pred.size() != 1) throw DimensionMismatch("logistic loss takes a single logit");
    return loss_of_estimate(kind, pred[0], y[0]);
}

}  // namespace iclsel

// SPDX-License-Identifier: Apache-2.0
//
// Differentiable models over a prompt embedding. Every model exposes its
// output f(e) and the exact Jacobian df/de (one row per output component).

#pragma once

#include "iclsel/attention.hpp"
#include "iclsel/core.hpp"
#include "iclsel/rng.hpp"

#include <string_view>
#include <variant>

namespace iclsel {

using ModelOutput = Vector;
using InputGradient = Matrix;  // d_out x d_emb

/// f(e) = W e + b. First-order expansions of this model are exact.
struct AffineModel {
    Matrix W;
    Vector b;

    AffineModel(Matrix W, Vector b);
    std::size_t input_dim() const { return static_cast<std::size_t>(W.cols()); }
    std::size_t output_dim() const { return static_cast<std::size_t>(W.rows()); }
    Vector forward(const Vector& emb) const;
    Matrix input_gradient(const Vector& emb) const;
};

/// f(e) = W2 relu(W1 e + b1) + b2, with relu'(0) taken as 0.
struct TwoLayerReLU {
    Matrix W1;
    Vector b1;
    Matrix W2;
    Vector b2;

    TwoLayerReLU(Matrix W1, Vector b1, Matrix W2, Vector b2);
    /// Gaussian weights with variance scale^2 / fan_in, zero biases unless bias_scale > 0.
    static TwoLayerReLU random(std::size_t d_emb, std::size_t hidden, std::size_t d_out, Rng& rng,
                               double scale = 1.0, double bias_scale = 0.0);

    std::size_t input_dim() const { return static_cast<std::size_t>(W1.cols()); }
    std::size_t output_dim() const { return static_cast<std::size_t>(W2.rows()); }
    std::size_t hidden() const { return static_cast<std::size_t>(W1.rows()); }
    Vector forward(const Vector& emb) const;
    Matrix input_gradient(const Vector& emb) const;
};

using Model = std::variant<AffineModel, TwoLayerReLU, LinearAttentionICL>;

ModelOutput forward(const Model& model, const Vector& emb);
InputGradient input_gradient(const Model& model, const Vector& emb);
std::size_t output_dim(const Model& model);
std::string_view model_kind(const Model& model);

/// SquaredError: ||pred - y||^2. Logistic: log(1 + exp(-(2y - 1) * logit)).
/// Throws ValidationError for labels outside {0, 1} under Logistic.
double loss(LossKind kind, const Vector& pred, const Vector& y);
double loss_of_estimate(LossKind kind, double estimate, double y);

}  // namespace iclsel

// SPDX-License-Identifier: Apache-2.0
//
// Stacked linear self-attention over prompt tokens.
//
// The embedding is viewed as an (k_max + 1) x t token matrix Z (t = token
// width). With N = 1 + sum of presence flags over demonstration slots, each
// layer updates every token by
//
//   A  = (1/N) sum_{j demo slot} z_j z_j^T
//   z <- z + V A Q z
//
// where Q is the key-query matrix and V the value-projection matrix. The
// prediction is R z_query after the last layer. Keys range over
// demonstration slots only, so the query attends to the prompt but never to
// itself. Padding slots are zero and remain zero.

#pragma once

#include "iclsel/core.hpp"

#include <cstddef>
#include <vector>

namespace iclsel {

struct AttentionLayer {
    Matrix value;      // t x t
    Matrix key_query;  // t x t
};

class LinearAttentionICL {
public:
    LinearAttentionICL(std::size_t d_in, std::size_t d_out, std::vector<AttentionLayer> layers,
                       Matrix readout, bool trained = false);

    /// Initialization in which each layer performs one preconditioning step on
    /// the inputs (x <- x - x_step * Sigma x) and one gradient step on the label
    /// channel (y <- y - y_step * c^T x); the readout negates the query's label
    /// channel, so the untrained model already predicts by gradient descent.
    static LinearAttentionICL descent_init(std::size_t d_in, std::size_t d_out, std::size_t n_layers,
                                           double x_step, double y_step);

    std::size_t d_in() const { return d_in_; }
    std::size_t d_out() const { return d_out_; }
    std::size_t token_dim() const { return d_in_ + d_out_ + 1; }
    std::size_t n_layers() const { return layers_.size(); }
    const std::vector<AttentionLayer>& layers() const { return layers_; }
    const Matrix& readout() const { return readout_; }
    bool trained() const { return trained_; }
    void mark_trained() { trained_ = true; }

    /// Checks that `emb` holds at least one demonstration slot plus the query.
    void check_input(const Vector& emb) const;

    Vector forward(const Vector& emb) const;
    Matrix input_gradient(const Vector& emb) const;

    /// The query row never enters the attention matrices, so with the
    /// demonstration slots of `emb` fixed the output is M * (query token).
    /// Returns that d_out x token_dim map M.
    Matrix query_map(const Vector& emb) const;

    /// Parameter gradients in the same shapes as the parameters.
    struct Gradients {
        std::vector<AttentionLayer> layers;
        Matrix readout;
        void set_zero_like(const LinearAttentionICL& model);
        double squared_norm() const;
        void scale(double s);
    };

    /// Reverse pass for output adjoint `out_adjoint`. Adds parameter gradients
    /// into `grads` (when non-null) and returns the gradient with respect to
    /// the embedding.
    Vector backprop(const Vector& emb, const Vector& out_adjoint, Gradients* grads) const;

    /// Forward value plus parameter gradients of 0.5 * ||f - target||^2 added to `grads`.
    double accumulate_squared_error(const Vector& emb, const Vector& target, Gradients& grads) const;

    // Mutable access for optimizers.
    std::vector<AttentionLayer>& mutable_layers() { return layers_; }
    Matrix& mutable_readout() { return readout_; }

private:
    struct Trace;
    Trace run(const Vector& emb) const;

    std::size_t d_in_;
    std::size_t d_out_;
    std::vector<AttentionLayer> layers_;
    Matrix readout_;  // d_out x t
    bool trained_ = false;
};

}  // namespace iclsel

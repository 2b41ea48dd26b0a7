// SPDX-License-Identifier: Apache-2.0
//
// Fixed-length prompt encoding. A prompt of up to k_max demonstrations and one
// query is laid out as k_max + 1 tokens of width d_in + d_out + 1:
//
//   slot j < |S|       : (x_{S[j]}, y_{S[j]}, 1)
//   |S| <= j < k_max   : all zeros (right padding)
//   slot k_max (query) : (x, 0, 1)

#pragma once

#include "iclsel/core.hpp"

#include <cstddef>

namespace iclsel {

using EmbeddingVector = Vector;

struct EmbeddingLayout {
    std::size_t k_max = 1;
    std::size_t d_in = 1;
    std::size_t d_out = 1;

    EmbeddingLayout() = default;
    /// Throws ValidationError for zero sizes.
    EmbeddingLayout(std::size_t k_max, std::size_t d_in, std::size_t d_out);

    std::size_t token_dim() const { return d_in + d_out + 1; }
    std::size_t slots() const { return k_max + 1; }
    std::size_t d_emb() const { return slots() * token_dim(); }
    std::size_t query_offset() const { return k_max * token_dim(); }
    std::size_t flag_channel() const { return d_in + d_out; }

    friend bool operator==(const EmbeddingLayout&, const EmbeddingLayout&) = default;
};

EmbeddingVector embed(const EmbeddingLayout& layout, const DemoSet& demos,
                      const PromptSubset& subset, const Vector& query_x);

/// Demonstration slots only, with the query slot left zero. embed() equals this
/// plus the query token, so displacements between two prompts for the same
/// query can be formed without touching the query.
EmbeddingVector embed_demonstrations(const EmbeddingLayout& layout, const DemoSet& demos,
                                     const PromptSubset& subset);

/// The encoding of an input with an empty prompt; used as the similarity feature
/// for retrieval baselines.
EmbeddingVector input_embedding(const EmbeddingLayout& layout, const Vector& x);

/// ||e - e0|| / ||e0||. Throws std::invalid_argument when ||e0|| = 0.
double relative_distance(const EmbeddingVector& e, const EmbeddingVector& e0);

double cosine_similarity(const Vector& a, const Vector& b);

}  // namespace iclsel

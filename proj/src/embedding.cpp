// SPDX-License-Identifier: Apache-2.0

#include "iclsel/embedding.hpp"

#include <string>

namespace iclsel {

EmbeddingLayout::EmbeddingLayout(std::size_t k_max_, std::size_t d_in_, std::size_t d_out_)
    : k_max(k_max_), d_in(d_in_), d_out(d_out_) {
    if (k_max == 0 || d_in == 0 || d_out == 0) {
        throw ValidationError("embedding layout needs k_max, d_in, d_out >= 1");
    }
}

namespace {

void write_token(const EmbeddingLayout& layout, EmbeddingVector& out, std::size_t slot,
                 const Example& ex) {
    if (static_cast<std::size_t>(ex.x.size()) != layout.d_in ||
        static_cast<std::size_t>(ex.y.size()) != layout.d_out) {
        throw DimensionMismatch("demonstration does not match the embedding layout");
    }
    const auto off = static_cast<Eigen::Index>(slot * layout.token_dim());
    out.segment(off, ex.x.size()) = ex.x;
    out.segment(off + ex.x.size(), ex.y.size()) = ex.y;
    out[off + static_cast<Eigen::Index>(layout.flag_channel())] = 1.0;
}

void write_query(const EmbeddingLayout& layout, EmbeddingVector& out, const Vector& x) {
    if (static_cast<std::size_t>(x.size()) != layout.d_in) {
        throw DimensionMismatch("query input does not match the embedding layout");
    }
    const auto off = static_cast<Eigen::Index>(layout.query_offset());
    out.segment(off, x.size()) = x;
    out[off + static_cast<Eigen::Index>(layout.flag_channel())] = 1.0;
}

}  // namespace

EmbeddingVector embed_demonstrations(const EmbeddingLayout& layout, const DemoSet& demos,
                                     const PromptSubset& subset) {
    if (subset.size() > layout.k_max) {
        throw ValidationError("subset of size " + std::to_string(subset.size()) +
                              " exceeds k_max = " + std::to_string(layout.k_max));
    }
    EmbeddingVector out = EmbeddingVector::Zero(static_cast<Eigen::Index>(layout.d_emb()));
    for (std::size_t slot = 0; slot < subset.size(); ++slot) {
        const auto idx = subset[slot];
        if (idx >= demos.size()) throw ValidationError("subset index out of range");
        write_token(layout, out, slot, demos[idx]);
    }
    return out;
}

EmbeddingVector embed(const EmbeddingLayout& layout, const DemoSet& demos,
                      const PromptSubset& subset, const Vector& query_x) {
    EmbeddingVector out = embed_demonstrations(layout, demos, subset);
    write_query(layout, out, query_x);
    return out;
}

EmbeddingVector input_embedding(const EmbeddingLayout& layout, const Vector& x) {
    EmbeddingVector out = EmbeddingVector::Zero(static_cast<Eigen::Index>(layout.d_emb()));
    write_query(layout, out, x);
    return out;
}

double relative_distance(const EmbeddingVector& e, const EmbeddingVector& e0) {
    if (e.size() != e0.size()) throw DimensionMismatch("relative_distance: length mismatch");
    const double base = e0.norm();
    if (base == 0.0) throw std::invalid_argument("relative_distance: zero anchor norm");
    return (e - e0).norm() / base;
}

double cosine_similarity(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("cosine_similarity: length mismatch");
    const double denom = a.norm() * b.norm();
    return denom == 0.0 ? 0.0 : a.dot(b) / denom;
}

}  // namespace iclsel

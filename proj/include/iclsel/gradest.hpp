// SPDX-License-Identifier: Apache-2.0
//
// First-order loss estimation around anchor prompts.
//
// For each training query the cache holds the anchor output f(phi(S0, x_i))
// and the projected Jacobian rows G_i P. A subset S is then scored by
//
//   f_hat_i = f(phi(S0, x_i)) + (G_i P)(P^T delta),   delta = phi(S, x_i) - phi(S0, x_i)
//
// without evaluating the model. The query slot is the same in both prompts,
// so delta does not depend on i and is projected once per subset.

#pragma once

#include "iclsel/core.hpp"
#include "iclsel/embedding.hpp"
#include "iclsel/metrics.hpp"
#include "iclsel/models.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace iclsel {

/// Random map R^{d_emb} -> R^{d_proj}, entries N(0, 1/d_proj), stored as P (d_emb x d_proj).
/// The identity variant has d_proj = d_emb and skips the multiplication.
class Projection {
public:
    static Projection gaussian(std::size_t d_emb, std::size_t d_proj, std::uint64_t seed);
    static Projection identity(std::size_t d_emb);

    std::size_t d_emb() const { return d_emb_; }
    std::size_t d_proj() const { return d_proj_; }
    std::uint64_t seed() const { return seed_; }
    bool is_identity() const { return identity_; }
    /// Empty for the identity projection.
    const Matrix& matrix() const { return P_; }

    /// P^T v.
    Vector apply(const Vector& v) const;
    /// G P for a matrix whose rows live in embedding space.
    Matrix apply_rows(const Matrix& G) const;

private:
    Projection(std::size_t d_emb, std::size_t d_proj, std::uint64_t seed, bool identity, Matrix P);

    std::size_t d_emb_;
    std::size_t d_proj_;
    std::uint64_t seed_;
    bool identity_;
    Matrix P_;
};

/// Throws ValidationError when d_proj == 0.
Projection build_projection(std::size_t d_emb, std::size_t d_proj, std::uint64_t seed);

struct AnchorEntry {
    Vector output;             // f(phi(S0, x_i))
    Matrix projected_gradient; // d_out x d_proj
    Vector label;
    double anchor_norm = 0.0;  // ||phi(S0, x_i)||
};

/// Precomputed outputs and projected gradients for one anchor subset.
/// Immutable once built; safe to share between threads.
class AnchorCache {
public:
    AnchorCache(std::size_t id, PromptSubset anchor, EmbeddingLayout layout,
                std::shared_ptr<const Projection> projection, std::shared_ptr<const DemoSet> demos,
                EmbeddingVector anchor_demo_embedding, std::vector<AnchorEntry> entries,
                double anchor_loss);

    std::size_t id() const { return id_; }
    const PromptSubset& anchor() const { return anchor_; }
    const EmbeddingLayout& layout() const { return layout_; }
    const Projection& projection() const { return *projection_; }
    const std::shared_ptr<const Projection>& shared_projection() const { return projection_; }
    const DemoSet& demos() const { return *demos_; }
    const std::shared_ptr<const DemoSet>& shared_demos() const { return demos_; }
    /// Demonstration slots of the anchor prompt (query slot zero).
    const EmbeddingVector& anchor_demo_embedding() const { return anchor_demo_embedding_; }
    const std::vector<AnchorEntry>& entries() const { return entries_; }
    std::size_t n_queries() const { return entries_.size(); }
    /// Exact h(S0) computed from the cached outputs.
    double anchor_loss() const { return anchor_loss_; }

private:
    std::size_t id_;
    PromptSubset anchor_;
    EmbeddingLayout layout_;
    std::shared_ptr<const Projection> projection_;
    std::shared_ptr<const DemoSet> demos_;
    EmbeddingVector anchor_demo_embedding_;
    std::vector<AnchorEntry> entries_;
    double anchor_loss_;
};

enum class Provenance { Estimated, Exact };

struct LossEstimate {
    PromptSubset subset;
    double value = 0.0;
    Provenance provenance = Provenance::Estimated;
    std::vector<std::size_t> anchor_ids;  // empty for exact values
    /// Mean over queries of ||phi(S, x) - phi(S0, x)|| / ||phi(S0, x)||; for
    /// several anchors, the smallest such mean. Zero for exact values.
    double relative_distance = 0.0;
};

/// Runs one forward and one input-gradient pass per query (recorded in `ledger`).
AnchorCache precompute_anchor(const Model& model, const EmbeddingLayout& layout,
                              std::shared_ptr<const DemoSet> demos, const QuerySet& queries,
                              const PromptSubset& anchor, std::shared_ptr<const Projection> projection,
                              LossKind kind, FlopLedger* ledger = nullptr, std::size_t id = 0);

AnchorCache precompute_anchor(const Model& model, const EmbeddingLayout& layout, const DemoSet& demos,
                              const QuerySet& queries, const PromptSubset& anchor,
                              const Projection& projection, LossKind kind,
                              FlopLedger* ledger = nullptr, std::size_t id = 0);

/// No model evaluations. Subsets set-equal to the anchor return the cached exact loss.
std::vector<LossEstimate> estimate_losses(const AnchorCache& cache, LossKind kind,
                                          const std::vector<PromptSubset>& subsets,
                                          FlopLedger* ledger = nullptr);

/// Arithmetic mean of the single-anchor estimates. Throws std::invalid_argument on an
/// empty cache list and ValidationError when caches disagree on layout or queries.
std::vector<LossEstimate> multi_anchor_estimate(const std::vector<AnchorCache>& caches, LossKind kind,
                                                const std::vector<PromptSubset>& subsets,
                                                FlopLedger* ledger = nullptr);

/// h(S) by full inference: one forward pass per query.
LossEstimate exact_loss(const Model& model, const EmbeddingLayout& layout, const DemoSet& demos,
                        const QuerySet& queries, const PromptSubset& subset, LossKind kind,
                        FlopLedger* ledger = nullptr);

/// Per-query losses for a fixed prompt, in query order.
std::vector<double> per_query_losses(const Model& model, const EmbeddingLayout& layout,
                                     const DemoSet& demos, const QuerySet& queries,
                                     const PromptSubset& subset, LossKind kind,
                                     FlopLedger* ledger = nullptr);

/// Mean loss of a prediction vector over queries; fixed summation order.
double mean_query_loss(LossKind kind, const std::vector<Vector>& predictions, const QuerySet& queries);

}  // namespace iclsel

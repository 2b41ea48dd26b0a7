// SPDX-License-Identifier: Apache-2.0

#include "iclsel/gradest.hpp"

#include "iclsel/parallel.hpp"
#include "iclsel/rng.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace iclsel {

Projection::Projection(std::size_t d_emb, std::size_t d_proj, std::uint64_t seed, bool identity, Matrix P)
    : d_emb_(d_emb), d_proj_(d_proj), seed_(seed), identity_(identity), P_(std::move(P)) {}

Projection Projection::gaussian(std::size_t d_emb, std::size_t d_proj, std::uint64_t seed) {
    if (d_emb == 0 || d_proj == 0) throw ValidationError("projection: dimensions must be >= 1");
    Rng rng = Rng(seed).fork("projection");
    Matrix P = rng.normal_matrix(d_emb, d_proj, 1.0 / std::sqrt(static_cast<double>(d_proj)));
    return Projection(d_emb, d_proj, seed, false, std::move(P));
}

Projection Projection::identity(std::size_t d_emb) {
    if (d_emb == 0) throw ValidationError("projection: dimensions must be >= 1");
    return Projection(d_emb, d_emb, 0, true, Matrix());
}

Vector Projection::apply(const Vector& v) const {
    if (static_cast<std::size_t>(v.size()) != d_emb_) throw DimensionMismatch("projection: input length");
    if (identity_) return v;
    return P_.transpose() * v;
}

Matrix Projection::apply_rows(const Matrix& G) const {
    if (static_cast<std::size_t>(G.cols()) != d_emb_) throw DimensionMismatch("projection: row length");
    if (identity_) return G;
    return G * P_;
}

Projection build_projection(std::size_t d_emb, std::size_t d_proj, std::uint64_t seed) {
    return Projection::gaussian(d_emb, d_proj, seed);
}

AnchorCache::AnchorCache(std::size_t id, PromptSubset anchor, EmbeddingLayout layout,
                         std::shared_ptr<const Projection> projection,
                         std::shared_ptr<const DemoSet> demos, EmbeddingVector anchor_demo_embedding,
                         std::vector<AnchorEntry> entries, double anchor_loss)
    : id_(id), anchor_(std::move(anchor)), layout_(layout), projection_(std::move(projection)),
      demos_(std::move(demos)), anchor_demo_embedding_(std::move(anchor_demo_embedding)),
      entries_(std::move(entries)), anchor_loss_(anchor_loss) {}

namespace {

void check_model_layout(const Model& model, const EmbeddingLayout& layout) {
    const bool ok = std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LinearAttentionICL>) {
                return m.d_in() == layout.d_in && m.d_out() == layout.d_out;
            } else {
                return m.input_dim() == layout.d_emb() && m.output_dim() == layout.d_out;
            }
        },
        model);
    if (!ok) throw DimensionMismatch("model dimensions do not match the embedding layout");
}

}  // namespace

double mean_query_loss(LossKind kind, const std::vector<Vector>& predictions, const QuerySet& queries) {
    if (predictions.size() != queries.size()) throw DimensionMismatch("prediction count != query count");
    if (queries.empty()) throw ValidationError("no queries");
    double sum = 0.0;
    for (std::size_t i = 0; i < queries.size(); ++i) sum += loss(kind, predictions[i], queries[i].y);
    return sum / static_cast<double>(queries.size());
}

AnchorCache precompute_anchor(const Model& model, const EmbeddingLayout& layout,
                              std::shared_ptr<const DemoSet> demos, const QuerySet& queries,
                              const PromptSubset& anchor, std::shared_ptr<const Projection> projection,
                              LossKind kind, FlopLedger* ledger, std::size_t id) {
    if (!demos || !projection) throw std::invalid_argument("precompute_anchor: null input");
    if (queries.empty()) throw ValidationError("precompute_anchor: no queries");
    check_model_layout(model, layout);
    if (projection->d_emb() != layout.d_emb()) throw DimensionMismatch("projection does not match layout");

    std::vector<AnchorEntry> entries(queries.size());
    parallel_for(queries.size(), [&](std::size_t i) {
        const EmbeddingVector e0 = embed(layout, *demos, anchor, queries[i].x);
        AnchorEntry& entry = entries[i];
        entry.output = forward(model, e0);
        entry.projected_gradient = projection->apply_rows(input_gradient(model, e0));
        entry.label = queries[i].y;
        entry.anchor_norm = e0.norm();
    });
    if (ledger) {
        ledger->add_forward(queries.size());
        ledger->add_backward(queries.size());
    }
    std::vector<Vector> outputs;
    outputs.reserve(entries.size());
    for (const auto& e : entries) outputs.push_back(e.output);
    const double h0 = mean_query_loss(kind, outputs, queries);
    EmbeddingVector anchor_demos = embed_demonstrations(layout, *demos, anchor);
    return AnchorCache(id, anchor, layout, std::move(projection), std::move(demos),
                       std::move(anchor_demos), std::move(entries), h0);
}

AnchorCache precompute_anchor(const Model& model, const EmbeddingLayout& layout, const DemoSet& demos,
                              const QuerySet& queries, const PromptSubset& anchor,
                              const Projection& projection, LossKind kind, FlopLedger* ledger,
                              std::size_t id) {
    return precompute_anchor(model, layout, std::make_shared<const DemoSet>(demos), queries, anchor,
                             std::make_shared<const Projection>(projection), kind, ledger, id);
}

std::vector<LossEstimate> estimate_losses(const AnchorCache& cache, LossKind kind,
                                          const std::vector<PromptSubset>& subsets,
                                          FlopLedger* ledger) {
    const auto& layout = cache.layout();
    const auto& entries = cache.entries();
    std::vector<LossEstimate> out(subsets.size());
    parallel_for(subsets.size(), [&](std::size_t j) {
        const PromptSubset& s = subsets[j];
        LossEstimate& est = out[j];
        est.subset = s;
        est.provenance = Provenance::Estimated;
        est.anchor_ids = {cache.id()};
        if (s.same_set(cache.anchor())) {  // set-equal subsets score identically
            est.value = cache.anchor_loss();
            est.relative_distance = 0.0;
            return;
        }
        const Vector delta = embed_demonstrations(layout, cache.demos(), s) - cache.anchor_demo_embedding();
        const double delta_norm = delta.norm();
        const Vector projected = cache.projection().apply(delta);
        double sum = 0.0, dist = 0.0;
        for (const auto& e : entries) {
            const Vector f_hat = e.output + e.projected_gradient * projected;
            sum += loss(kind, f_hat, e.label);
            dist += delta_norm / e.anchor_norm;
        }
        const auto n = static_cast<double>(entries.size());
        est.value = sum / n;
        est.relative_distance = dist / n;
    });
    if (ledger) ledger->add_vector_ops(subsets.size() * (entries.size() + 1));
    return out;
}

std::vector<LossEstimate> multi_anchor_estimate(const std::vector<AnchorCache>& caches, LossKind kind,
                                                const std::vector<PromptSubset>& subsets,
                                                FlopLedger* ledger) {
    if (caches.empty()) throw std::invalid_argument("multi_anchor_estimate: no anchors");
    for (const auto& c : caches) {
        if (!(c.layout() == caches.front().layout()) || c.n_queries() != caches.front().n_queries() ||
            c.projection().d_proj() != caches.front().projection().d_proj()) {
            throw ValidationError("multi_anchor_estimate: caches disagree on layout, queries or projection");
        }
    }
    std::vector<std::vector<LossEstimate>> per_anchor;
    per_anchor.reserve(caches.size());
    for (const auto& c : caches) per_anchor.push_back(estimate_losses(c, kind, subsets, ledger));

    std::vector<LossEstimate> out(subsets.size());
    for (std::size_t j = 0; j < subsets.size(); ++j) {
        LossEstimate& est = out[j];
        est.subset = subsets[j];
        est.provenance = Provenance::Estimated;
        double sum = 0.0;
        est.relative_distance = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < caches.size(); ++a) {
            sum += per_anchor[a][j].value;
            est.anchor_ids.push_back(caches[a].id());
            est.relative_distance = std::min(est.relative_distance, per_anchor[a][j].relative_distance);
        }
        est.value = sum / static_cast<double>(caches.size());
    }
    return out;
}

std::vector<double> per_query_losses(const Model& model, const EmbeddingLayout& layout,
                                     const DemoSet& demos, const QuerySet& queries,
                                     const PromptSubset& subset, LossKind kind, FlopLedger* ledger) {
    check_model_layout(model, layout);
    std::vector<double> out(queries.size());
    parallel_for(queries.size(), [&](std::size_t i) {
        out[i] = loss(kind, forward(model, embed(layout, demos, subset, queries[i].x)), queries[i].y);
    });
    if (ledger) ledger->add_forward(queries.size());
    return out;
}

LossEstimate exact_loss(const Model& model, const EmbeddingLayout& layout, const DemoSet& demos,
                        const QuerySet& queries, const PromptSubset& subset, LossKind kind,
                        FlopLedger* ledger) {
    if (queries.empty()) throw ValidationError("exact_loss: no queries");
    const auto losses = per_query_losses(model, layout, demos, queries, subset, kind, ledger);
    double sum = 0.0;
    for (double l : losses) sum += l;
    LossEstimate est;
    est.subset = subset;
    est.value = sum / static_cast<double>(losses.size());
    est.provenance = Provenance::Exact;
    return est;
}

}  // namespace iclsel

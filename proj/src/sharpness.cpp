// SPDX-License-Identifier: Apache-2.0

#include "iclsel/sharpness.hpp"

#include "iclsel/parallel.hpp"

namespace iclsel {

double perturbed_query_loss(const Model& model, const EmbeddingLayout& layout, const DemoSet& demos,
                            const PromptSubset& subset, const QuerySet& queries, LossKind kind,
                            const Vector& u) {
    if (static_cast<std::size_t>(u.size()) != layout.token_dim()) {
        throw DimensionMismatch("query perturbation must have token width");
    }
    if (queries.empty()) throw ValidationError("perturbed_query_loss: no queries");
    std::vector<double> losses(queries.size());
    parallel_for(queries.size(), [&](std::size_t i) {
        EmbeddingVector e = embed(layout, demos, subset, queries[i].x);
        e.segment(static_cast<Eigen::Index>(layout.query_offset()), u.size()) += u;
        losses[i] = loss(kind, forward(model, e), queries[i].y);
    });
    double sum = 0.0;
    for (double l : losses) sum += l;
    return sum / static_cast<double>(losses.size());
}

namespace {

// Same values as perturbed_query_loss for the attention model, but the query
// map is computed once instead of once per query and probe sample.
ScalarFunction attention_landscape(const LinearAttentionICL& model, const EmbeddingLayout& layout,
                                   const DemoSet& demos, const PromptSubset& subset, const QuerySet& queries,
                                   LossKind kind) {
    const auto offset = static_cast<Eigen::Index>(layout.query_offset());
    const auto width = static_cast<Eigen::Index>(layout.token_dim());
    const Matrix map = model.query_map(embed(layout, demos, subset, queries.front().x));
    Matrix tokens(width, static_cast<Eigen::Index>(queries.size()));
    Matrix labels(map.rows(), tokens.cols());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        tokens.col(c) = embed(layout, demos, subset, queries[i].x).segment(offset, width);
        labels.col(c) = queries[i].y;
    }
    return [=](const Vector& u) {
        if (u.size() != width) throw DimensionMismatch("query perturbation must have token width");
        const Matrix preds = map * (tokens.colwise() + u);
        double sum = 0.0;
        for (Eigen::Index c = 0; c < preds.cols(); ++c) sum += loss(kind, preds.col(c), labels.col(c));
        return sum / static_cast<double>(preds.cols());
    };
}

}  // namespace

std::vector<SharpnessRow> sharpness_report(const Model& model, const EmbeddingLayout& layout,
                                           const DemoSet& demos, const std::vector<NamedSelection>& selections,
                                           const QuerySet& train, const QuerySet& test, LossKind kind,
                                           const HessianProbeConfig& probe) {
    probe.validate();
    const Vector origin = Vector::Zero(static_cast<Eigen::Index>(layout.token_dim()));
    std::vector<SharpnessRow> rows;
    for (const auto& sel : selections) {
        SharpnessRow row;
        row.method = sel.method;
        auto landscape = [&](const QuerySet& qs) -> ScalarFunction {
            if (const auto* attn = std::get_if<LinearAttentionICL>(&model); attn && !qs.empty()) {
                return attention_landscape(*attn, layout, demos, sel.subset, qs, kind);
            }
            return [&, qs_ptr = &qs](const Vector& u) {
                return perturbed_query_loss(model, layout, demos, sel.subset, *qs_ptr, kind, u);
            };
        };
        row.train_loss = landscape(train)(origin);
        row.test_loss = landscape(test)(origin);
        row.train_trace = hessian_trace(landscape(train), origin, probe);
        row.test_trace = hessian_trace(landscape(test), origin, probe);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace iclsel

// SPDX-License-Identifier: Apache-2.0
//
// Loss and loss-landscape sharpness of a chosen prompt. The landscape is the
// mean query loss as a function of a perturbation u added to the query token:
//
//   F(u) = (1/n) sum_i loss(f(phi(S, x_i) + [0, ..., 0, u]), y_i)
//
// and its Hessian trace at u = 0 is estimated by noise injection.

#pragma once

#include "iclsel/core.hpp"
#include "iclsel/embedding.hpp"
#include "iclsel/metrics.hpp"
#include "iclsel/models.hpp"

#include <string>
#include <vector>

namespace iclsel {

struct SharpnessRow {
    std::string method;
    double train_loss = 0.0;
    double test_loss = 0.0;
    HessianTraceEstimate train_trace;
    HessianTraceEstimate test_trace;
};

/// Mean query loss with the query token shifted by `u` (length token_dim).
double perturbed_query_loss(const Model& model, const EmbeddingLayout& layout, const DemoSet& demos,
                            const PromptSubset& subset, const QuerySet& queries, LossKind kind,
                            const Vector& u);

struct NamedSelection {
    std::string method;
    PromptSubset subset;
};

/// One row per selection. The same probe seed is used for every row, so
/// identical selections give identical rows.
std::vector<SharpnessRow> sharpness_report(const Model& model, const EmbeddingLayout& layout,
                                           const DemoSet& demos, const std::vector<NamedSelection>& selections,
                                           const QuerySet& train, const QuerySet& test, LossKind kind,
                                           const HessianProbeConfig& probe);

}  // namespace iclsel

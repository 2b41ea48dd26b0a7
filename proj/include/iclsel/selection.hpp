// SPDX-License-Identifier: Apache-2.0
//
// Demonstration selection: estimated and exact-inference variants of random
// ensemble scoring, greedy forward selection and prefiltered singleton
// ranking, plus similarity baselines.
//
// Accelerated and exact variants draw from the same named random streams, so
// with exact estimates they make identical choices.

#pragma once

#include "iclsel/core.hpp"
#include "iclsel/embedding.hpp"
#include "iclsel/gradest.hpp"
#include "iclsel/metrics.hpp"
#include "iclsel/models.hpp"

#include <optional>
#include <string>
#include <vector>

namespace iclsel {

/// Everything a selector needs besides its configuration.
struct SelectionProblem {
    const Model& model;
    EmbeddingLayout layout;
    const DemoSet& demos;
    const QuerySet& queries;
    LossKind loss = LossKind::SquaredError;
};

struct InfluenceScores {
    std::vector<double> s;              // one per demonstration
    std::vector<std::size_t> coverage;  // sampled subsets containing each demonstration
    std::size_t alpha = 1;
};

struct ForwardStep {
    std::size_t size = 0;     // prompt size after this step
    std::size_t chosen = 0;   // demonstration appended
    double value = 0.0;       // its (estimated or exact) loss
    bool estimated = false;
    std::optional<std::size_t> anchor_demo;  // random extension used as the anchor
};

struct SelectionResult {
    std::string method;
    PromptSubset chosen;
    std::optional<InfluenceScores> scores;
    LedgerSnapshot ledger;
    std::vector<ForwardStep> trace;
    std::vector<LossEstimate> subset_estimates;  // random ensemble: one per sampled subset
    std::vector<std::size_t> anchor_subsets;      // positions into subset_estimates
    std::vector<std::size_t> candidates;          // cross-entropy prefilter pool
};

/// m subsets of k distinct indices, drawn uniformly; draws that leave a
/// demonstration uncovered are redrawn. Throws ValidationError when m * k < n_demo.
std::vector<PromptSubset> sample_subsets(std::size_t n_demo, std::size_t m, std::size_t k,
                                         std::uint64_t seed);

/// m subsets near `anchor`: each replaces between 1 and max_swaps slots
/// (uniform) with demonstrations outside the anchor.
std::vector<PromptSubset> sample_local_subsets(std::size_t n_demo, const PromptSubset& anchor, std::size_t m,
                                               std::size_t max_swaps, std::uint64_t seed);

/// s_q = mean of the subset values over the subsets containing q.
/// Throws ValidationError when some demonstration is in no subset.
InfluenceScores influence_scores(std::size_t n_demo, const std::vector<LossEstimate>& estimates,
                                 std::size_t alpha = 1);

/// The k smallest values, ascending; ties go to the lower index.
std::vector<std::size_t> lowest_k(const std::vector<double>& values, std::size_t k);
/// All indices with value <= lambda, in index order.
std::vector<std::size_t> at_most(const std::vector<double>& values, double lambda);

SelectionResult select_random_ensemble(const SelectionProblem& p, const SelectionConfig& cfg);
SelectionResult select_forward(const SelectionProblem& p, const SelectionConfig& cfg);
SelectionResult select_cross_entropy(const SelectionProblem& p, const SelectionConfig& cfg);

SelectionResult oracle_random_ensemble(const SelectionProblem& p, const SelectionConfig& cfg);
SelectionResult oracle_forward_selection(const SelectionProblem& p, const SelectionConfig& cfg);
SelectionResult oracle_cross_entropy(const SelectionProblem& p, const SelectionConfig& cfg);

/// Cosine similarity of each demonstration's input encoding to the mean query encoding.
std::vector<double> similarity_to_queries(const EmbeddingLayout& layout, const DemoSet& demos,
                                          const QuerySet& queries);

SelectionResult select_topk(const EmbeddingLayout& layout, const DemoSet& demos, const QuerySet& queries,
                            std::size_t k);
SelectionResult select_random(std::size_t n_demo, std::size_t k, std::uint64_t seed);

/// Labels `inputs` with the model prompted by the k queries most similar to
/// them. Logistic predictions are thresholded at logit 0.
DemoSet pseudo_label(const Model& model, const EmbeddingLayout& layout, const std::vector<Vector>& inputs,
                     const QuerySet& queries, std::size_t k, LossKind kind);

/// The pool_size queries nearest to `test_x` in input encoding, in their original order.
QuerySet nearest_queries(const EmbeddingLayout& layout, const QuerySet& pool, const Vector& test_x,
                         std::size_t pool_size);

SelectionResult per_query_select(const Model& model, const EmbeddingLayout& layout, const DemoSet& demos,
                                 const QuerySet& pool, const Vector& test_x, std::size_t pool_size,
                                 LossKind kind, const SelectionConfig& cfg);

}  // namespace iclsel

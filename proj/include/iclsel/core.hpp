// SPDX-License-Identifier: Apache-2.0
//
// Shared domain types: datasets, prompt subsets, losses and the selection
// configuration consumed by every selector.

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace iclsel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// One labeled example. Used for demonstrations, training queries and test queries.
struct Example {
    Vector x;
    Vector y;
};

using DemoSet = std::vector<Example>;
using QuerySet = std::vector<Example>;

enum class LossKind { SquaredError, Logistic };

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

/// A complete selection problem: candidate demonstrations plus the query set
/// whose average loss the selection minimizes. `test` is optional held-out data.
struct Dataset {
    std::size_t d_in = 0;
    std::size_t d_out = 0;
    LossKind loss = LossKind::SquaredError;
    DemoSet demos;
    QuerySet queries;
    QuerySet test;
};

struct Violation {
    enum class Kind { Empty, DimensionMismatch, NonFinite, LabelDomain };
    Kind kind;
    std::string where;
    std::string message;
};

/// Returns every problem found; an empty report means the data is usable.
std::vector<Violation> validate_dataset(const DemoSet& demos, const QuerySet& queries,
                                        LossKind kind);
std::vector<Violation> validate_dataset(const Dataset& data);

/// Ordered set of distinct demonstration indices. Order is the slot order used
/// when the subset is embedded; set semantics are available via same_set().
class PromptSubset {
public:
    PromptSubset() = default;
    /// Throws ValidationError on duplicates or indices outside [0, n_demo).
    PromptSubset(std::vector<std::size_t> indices, std::size_t n_demo);

    std::span<const std::size_t> indices() const { return indices_; }
    std::size_t size() const { return indices_.size(); }
    bool empty() const { return indices_.empty(); }
    std::size_t operator[](std::size_t slot) const { return indices_[slot]; }
    bool contains(std::size_t index) const;

    /// Copy of this subset with `index` appended in the last slot.
    PromptSubset with(std::size_t index, std::size_t n_demo) const;

    bool same_set(const PromptSubset& other) const;
    std::vector<std::size_t> sorted() const;

    friend bool operator==(const PromptSubset&, const PromptSubset&) = default;

private:
    std::vector<std::size_t> indices_;
};

enum class AnchorPolicy { Random, MeanEmbedding };

struct SelectionConfig {
    std::size_t m = 500;            // sampled subsets
    std::size_t k = 5;              // target subset size
    std::size_t alpha = 5;          // anchors
    std::size_t d_proj = 400;       // projection dimension
    std::size_t t_start = 4;        // first forward-selection step that estimates
    std::size_t k_prefilter = 20;   // cross-entropy candidate pool
    std::optional<double> score_threshold;
    std::uint64_t seed = 0;
    bool identity_projection = false;
    AnchorPolicy anchor_policy = AnchorPolicy::Random;

    /// Throws ValidationError naming the first violated invariant.
    void validate(std::size_t n_demo) const;

    /// m = max(500, 2 n), alpha = 5, d_proj = 400, t_start = 4, K = min(n, 4k).
    static SelectionConfig defaults(std::size_t n_demo, std::size_t k, std::uint64_t seed = 0);
};

}  // namespace iclsel

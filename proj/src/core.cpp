// SPDX-License-Identifier: Apache-2.0

#include "iclsel/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace iclsel {

std::string_view to_string(LossKind kind) {
    switch (kind) {
    case LossKind::SquaredError: return "squared";
    case LossKind::Logistic: return "logistic";
    }
    return "unknown";
}

LossKind loss_kind_from_string(std::string_view name) {
    if (name == "squared") return LossKind::SquaredError;
    if (name == "logistic") return LossKind::Logistic;
    throw ValidationError("unknown loss kind '" + std::string(name) + "'");
}

namespace {

void check_examples(const std::vector<Example>& items, std::string_view what, std::size_t d_in,
                    std::size_t d_out, LossKind kind, std::vector<Violation>& out) {
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& e = items[i];
        std::string where = std::string(what) + "[" + std::to_string(i) + "]";
        if (static_cast<std::size_t>(e.x.size()) != d_in ||
            static_cast<std::size_t>(e.y.size()) != d_out) {
            out.push_back({Violation::Kind::DimensionMismatch, where,
                           "expected x of length " + std::to_string(d_in) + " and y of length " +
                               std::to_string(d_out)});
            continue;
        }
        if (!e.x.allFinite() || !e.y.allFinite()) {
            out.push_back({Violation::Kind::NonFinite, where, "non-finite entry"});
            continue;
        }
        if (kind == LossKind::Logistic) {
            if (d_out != 1 || (e.y[0] != 0.0 && e.y[0] != 1.0)) {
                out.push_back({Violation::Kind::LabelDomain, where,
                               "logistic loss needs a single label in {0, 1}"});
            }
        }
    }
}

}  // namespace

std::vector<Violation> validate_dataset(const DemoSet& demos, const QuerySet& queries,
                                        LossKind kind) {
    std::vector<Violation> out;
    if (demos.empty()) out.push_back({Violation::Kind::Empty, "demos", "no demonstrations"});
    if (queries.empty()) out.push_back({Violation::Kind::Empty, "queries", "no queries"});
    const Example* ref = !demos.empty() ? &demos.front() : (!queries.empty() ? &queries.front() : nullptr);
    if (ref == nullptr) return out;
    const auto d_in = static_cast<std::size_t>(ref->x.size());
    const auto d_out = static_cast<std::size_t>(ref->y.size());
    if (d_in == 0 || d_out == 0) {
        out.push_back({Violation::Kind::DimensionMismatch, "demos[0]", "zero-length x or y"});
        return out;
    }
    check_examples(demos, "demos", d_in, d_out, kind, out);
    check_examples(queries, "queries", d_in, d_out, kind, out);
    return out;
}

std::vector<Violation> validate_dataset(const Dataset& data) {
    auto out = validate_dataset(data.demos, data.queries, data.loss);
    if (!data.demos.empty() && (static_cast<std::size_t>(data.demos.front().x.size()) != data.d_in ||
                                static_cast<std::size_t>(data.demos.front().y.size()) != data.d_out)) {
        out.push_back({Violation::Kind::DimensionMismatch, "header",
                       "declared d_in/d_out disagree with the data"});
    }
    if (!data.test.empty()) check_examples(data.test, "test", data.d_in, data.d_out, data.loss, out);
    return out;
}

PromptSubset::PromptSubset(std::vector<std::size_t> indices, std::size_t n_demo)
    : indices_(std::move(indices)) {
    auto sorted_copy = indices_;
    std::sort(sorted_copy.begin(), sorted_copy.end());
    if (std::adjacent_find(sorted_copy.begin(), sorted_copy.end()) != sorted_copy.end()) {
        throw ValidationError("prompt subset has duplicate indices");
    }
    if (!sorted_copy.empty() && sorted_copy.back() >= n_demo) {
        throw ValidationError("prompt subset index " + std::to_string(sorted_copy.back()) +
                              " out of range for " + std::to_string(n_demo) + " demonstrations");
    }
}

bool PromptSubset::contains(std::size_t index) const {
    return std::find(indices_.begin(), indices_.end(), index) != indices_.end();
}

PromptSubset PromptSubset::with(std::size_t index, std::size_t n_demo) const {
    auto next = indices_;
    next.push_back(index);
    return PromptSubset(std::move(next), n_demo);
}

std::vector<std::size_t> PromptSubset::sorted() const {
    auto s = indices_;
    std::sort(s.begin(), s.end());
    return s;
}

bool PromptSubset::same_set(const PromptSubset& other) const {
    return size() == other.size() && sorted() == other.sorted();
}

void SelectionConfig::validate(std::size_t n_demo) const {
    auto fail = [](const std::string& msg) { throw ValidationError("selection config: " + msg); };
    if (n_demo == 0) fail("empty demonstration set");
    if (k < 1 || k > n_demo) fail("k must lie in [1, n_demo]");
    if (m < 1) fail("m must be at least 1");
    if (alpha < 1 || alpha > m) fail("alpha must lie in [1, m]");
    if (d_proj < 1) fail("d_proj must be at least 1");
    if (t_start < 1) fail("t_start must be at least 1");
    if (k_prefilter < k || k_prefilter > n_demo) fail("k_prefilter must lie in [k, n_demo]");
    if (score_threshold && !std::isfinite(*score_threshold)) fail("score threshold must be finite");
}

SelectionConfig SelectionConfig::defaults(std::size_t n_demo, std::size_t k, std::uint64_t seed) {
    SelectionConfig cfg;
    cfg.m = std::max<std::size_t>(500, 2 * n_demo);
    cfg.k = k;
    cfg.alpha = 5;
    cfg.d_proj = 400;
    cfg.t_start = 4;
    cfg.k_prefilter = std::min(n_demo, 4 * k);
    cfg.seed = seed;
    return cfg;
}

}  // namespace iclsel

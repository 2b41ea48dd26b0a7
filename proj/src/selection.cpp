// SPDX-License-Identifier: Apache-2.0

#include "iclsel/selection.hpp"

#include "iclsel/parallel.hpp"
#include "iclsel/rng.hpp"

#include <algorithm>
#include <limits>
#include <memory>
#include <numeric>

namespace iclsel {

namespace {

constexpr std::size_t kMaxCoverageRedraws = 64;

std::vector<PromptSubset> draw_subsets(Rng& rng, std::size_t n, std::size_t m, std::size_t k) {
    std::vector<PromptSubset> out;
    out.reserve(m);
    for (std::size_t j = 0; j < m; ++j) out.emplace_back(rng.sample_without_replacement(n, k), n);
    return out;
}

std::vector<std::size_t> coverage_of(std::size_t n, const std::vector<PromptSubset>& subsets) {
    std::vector<std::size_t> cov(n, 0);
    for (const auto& s : subsets)
        for (std::size_t q : s.indices()) ++cov[q];
    return cov;
}

// Swap each uncovered index into a random slot whose occupant is covered twice.
// Only reached when repeated redraws keep missing an index (m * k close to n).
void repair_coverage(Rng& rng, std::size_t n, std::vector<PromptSubset>& subsets) {
    auto cov = coverage_of(n, subsets);
    for (std::size_t u = 0; u < n; ++u) {
        if (cov[u] > 0) continue;
        for (;;) {
            const std::size_t j = rng.below(subsets.size());
            std::vector<std::size_t> idx(subsets[j].indices().begin(), subsets[j].indices().end());
            const std::size_t slot = rng.below(idx.size());
            if (cov[idx[slot]] < 2) continue;
            --cov[idx[slot]];
            idx[slot] = u;
            ++cov[u];
            subsets[j] = PromptSubset(std::move(idx), n);
            break;
        }
    }
}

Projection make_projection(const EmbeddingLayout& layout, const SelectionConfig& cfg) {
    return cfg.identity_projection ? Projection::identity(layout.d_emb())
                                   : build_projection(layout.d_emb(), cfg.d_proj, cfg.seed);
}

void check_problem(const SelectionProblem& p, const SelectionConfig& cfg) {
    cfg.validate(p.demos.size());
    if (p.queries.empty()) throw ValidationError("selection: no queries");
}

template <typename T>
std::vector<std::size_t> order_by(const std::vector<T>& values, bool descending) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return descending ? values[a] > values[b] : values[a] < values[b];
    });
    return idx;
}

std::size_t argmin(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

std::vector<std::size_t> choose_anchors(const SelectionProblem& p, const SelectionConfig& cfg,
                                        const std::vector<PromptSubset>& subsets) {
    if (cfg.anchor_policy == AnchorPolicy::Random) {
        Rng rng = Rng(cfg.seed).fork("anchors");
        return rng.sample_without_replacement(subsets.size(), cfg.alpha);
    }
    // Subsets whose demonstration encodings lie nearest their mean.
    std::vector<EmbeddingVector> emb(subsets.size());
    parallel_for(subsets.size(), [&](std::size_t j) { emb[j] = embed_demonstrations(p.layout, p.demos, subsets[j]); });
    Vector mean = Vector::Zero(static_cast<Eigen::Index>(p.layout.d_emb()));
    for (const auto& e : emb) mean += e;
    mean /= static_cast<double>(emb.size());
    std::vector<double> dist(emb.size());
    for (std::size_t j = 0; j < emb.size(); ++j) dist[j] = (emb[j] - mean).squaredNorm();
    auto order = order_by(dist, false);
    order.resize(cfg.alpha);
    return order;
}

PromptSubset finish_scores(const InfluenceScores& scores, const SelectionConfig& cfg, std::size_t n) {
    if (cfg.score_threshold) return PromptSubset(at_most(scores.s, *cfg.score_threshold), n);
    return PromptSubset(lowest_k(scores.s, cfg.k), n);
}

}  // namespace

std::vector<PromptSubset> sample_subsets(std::size_t n_demo, std::size_t m, std::size_t k, std::uint64_t seed) {
    if (k < 1 || k > n_demo) throw ValidationError("sample_subsets: need 1 <= k <= n_demo");
    if (m * k < n_demo) {
        throw ValidationError("sample_subsets: " + std::to_string(m) + " subsets of size " + std::to_string(k) +
                              " cannot cover " + std::to_string(n_demo) + " demonstrations");
    }
    Rng rng = Rng(seed).fork("subsets");
    for (std::size_t attempt = 0; attempt < kMaxCoverageRedraws; ++attempt) {
        auto subsets = draw_subsets(rng, n_demo, m, k);
        const auto cov = coverage_of(n_demo, subsets);
        if (std::all_of(cov.begin(), cov.end(), [](std::size_t c) { return c > 0; })) return subsets;
    }
    auto subsets = draw_subsets(rng, n_demo, m, k);
    repair_coverage(rng, n_demo, subsets);
    return subsets;
}

std::vector<PromptSubset> sample_local_subsets(std::size_t n_demo, const PromptSubset& anchor, std::size_t m,
                                               std::size_t max_swaps, std::uint64_t seed) {
    const std::size_t k = anchor.size();
    if (k == 0 || max_swaps < 1 || max_swaps > k || n_demo < k + max_swaps) {
        throw ValidationError("sample_local_subsets: need 1 <= max_swaps <= |anchor| and enough outside demonstrations");
    }
    std::vector<std::size_t> outside;
    for (std::size_t i = 0; i < n_demo; ++i)
        if (!anchor.contains(i)) outside.push_back(i);
    Rng rng = Rng(seed).fork("local-subsets");
    std::vector<PromptSubset> out;
    out.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t r = 1 + rng.below(max_swaps);
        const auto slots = rng.sample_without_replacement(k, r);
        const auto fresh = rng.sample_without_replacement(outside.size(), r);
        std::vector<std::size_t> idx(anchor.indices().begin(), anchor.indices().end());
        for (std::size_t t = 0; t < r; ++t) idx[slots[t]] = outside[fresh[t]];
        out.emplace_back(std::move(idx), n_demo);
    }
    return out;
}

InfluenceScores influence_scores(std::size_t n_demo, const std::vector<LossEstimate>& estimates, std::size_t alpha) {
    InfluenceScores out;
    out.alpha = alpha;
    out.s.assign(n_demo, 0.0);
    out.coverage.assign(n_demo, 0);
    for (const auto& e : estimates) {
        for (std::size_t q : e.subset.indices()) {
            if (q >= n_demo) throw ValidationError("influence_scores: index out of range");
            out.s[q] += e.value;
            ++out.coverage[q];
        }
    }
    for (std::size_t q = 0; q < n_demo; ++q) {
        if (out.coverage[q] == 0) {
            throw ValidationError("influence_scores: demonstration " + std::to_string(q) + " is in no subset");
        }
        out.s[q] /= static_cast<double>(out.coverage[q]);
    }
    return out;
}

std::vector<std::size_t> lowest_k(const std::vector<double>& values, std::size_t k) {
    if (k > values.size()) throw ValidationError("lowest_k: k exceeds the number of values");
    auto order = order_by(values, false);
    order.resize(k);
    return order;
}

std::vector<std::size_t> at_most(const std::vector<double>& values, double lambda) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] <= lambda) out.push_back(i);
    return out;
}

// ---------------------------------------------------------------------------
// Random ensemble

SelectionResult select_random_ensemble(const SelectionProblem& p, const SelectionConfig& cfg) {
    check_problem(p, cfg);
    FlopLedger ledger;
    const std::size_t n = p.demos.size();
    auto subsets = sample_subsets(n, cfg.m, cfg.k, cfg.seed);
    const auto anchors = choose_anchors(p, cfg, subsets);

    auto demos = std::make_shared<const DemoSet>(p.demos);
    auto proj = std::make_shared<const Projection>(make_projection(p.layout, cfg));
    std::vector<AnchorCache> caches;
    caches.reserve(anchors.size());
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        caches.push_back(precompute_anchor(p.model, p.layout, demos, p.queries, subsets[anchors[a]], proj,
                                           p.loss, &ledger, anchors[a]));
    }

    SelectionResult r;
    r.method = "ge-re";
    r.subset_estimates = multi_anchor_estimate(caches, p.loss, subsets, &ledger);
    r.anchor_subsets = anchors;
    r.scores = influence_scores(n, r.subset_estimates, anchors.size());
    r.chosen = finish_scores(*r.scores, cfg, n);
    r.ledger = ledger.snapshot();
    return r;
}

SelectionResult oracle_random_ensemble(const SelectionProblem& p, const SelectionConfig& cfg) {
    check_problem(p, cfg);
    FlopLedger ledger;
    const std::size_t n = p.demos.size();
    auto subsets = sample_subsets(n, cfg.m, cfg.k, cfg.seed);

    SelectionResult r;
    r.method = "oracle-re";
    r.subset_estimates.reserve(subsets.size());
    for (const auto& s : subsets) {
        r.subset_estimates.push_back(exact_loss(p.model, p.layout, p.demos, p.queries, s, p.loss, &ledger));
    }
    r.scores = influence_scores(n, r.subset_estimates, 1);
    r.chosen = finish_scores(*r.scores, cfg, n);
    r.ledger = ledger.snapshot();
    return r;
}

// ---------------------------------------------------------------------------
// Forward selection

namespace {

SelectionResult forward_impl(const SelectionProblem& p, const SelectionConfig& cfg, bool estimate) {
    check_problem(p, cfg);
    FlopLedger ledger;
    const std::size_t n = p.demos.size();
    Rng rng = Rng(cfg.seed).fork("forward-anchors");
    auto demos = std::make_shared<const DemoSet>(p.demos);
    std::shared_ptr<const Projection> proj;
    if (estimate) proj = std::make_shared<const Projection>(make_projection(p.layout, cfg));

    SelectionResult r;
    r.method = estimate ? "ge-fs" : "oracle-fs";
    PromptSubset current({}, n);
    for (std::size_t size = 1; size <= cfg.k; ++size) {
        std::vector<std::size_t> cands;
        for (std::size_t c = 0; c < n; ++c)
            if (!current.contains(c)) cands.push_back(c);
        std::vector<PromptSubset> extended;
        extended.reserve(cands.size());
        for (std::size_t c : cands) extended.push_back(current.with(c, n));

        ForwardStep step;
        step.size = size;
        std::vector<double> values(cands.size());
        if (estimate && size >= cfg.t_start) {
            const std::size_t pick = rng.below(cands.size());
            step.estimated = true;
            step.anchor_demo = cands[pick];
            const auto cache = precompute_anchor(p.model, p.layout, demos, p.queries, extended[pick], proj,
                                                 p.loss, &ledger, size);
            const auto est = estimate_losses(cache, p.loss, extended, &ledger);
            for (std::size_t i = 0; i < est.size(); ++i) values[i] = est[i].value;
        } else {
            for (std::size_t i = 0; i < extended.size(); ++i) {
                values[i] = exact_loss(p.model, p.layout, p.demos, p.queries, extended[i], p.loss, &ledger).value;
            }
        }
        const std::size_t best = argmin(values);
        step.chosen = cands[best];
        step.value = values[best];
        r.trace.push_back(step);
        current = extended[best];
    }
    r.chosen = current;
    r.ledger = ledger.snapshot();
    return r;
}

// ---------------------------------------------------------------------------
// Cross-entropy style singleton ranking

SelectionResult cross_entropy_impl(const SelectionProblem& p, const SelectionConfig& cfg, bool estimate) {
    check_problem(p, cfg);
    FlopLedger ledger;
    const std::size_t n = p.demos.size();
    const auto sim = similarity_to_queries(p.layout, p.demos, p.queries);
    auto pool = order_by(sim, true);
    pool.resize(cfg.k_prefilter);

    std::vector<PromptSubset> singles;
    singles.reserve(pool.size());
    for (std::size_t c : pool) singles.emplace_back(std::vector<std::size_t>{c}, n);

    SelectionResult r;
    r.method = estimate ? "ge-ce" : "oracle-ce";
    r.candidates = pool;
    std::vector<double> values(pool.size());
    if (estimate) {
        Rng rng = Rng(cfg.seed).fork("ce-anchor");
        const std::size_t pick = rng.below(pool.size());
        auto proj = std::make_shared<const Projection>(make_projection(p.layout, cfg));
        const auto cache = precompute_anchor(p.model, p.layout, std::make_shared<const DemoSet>(p.demos),
                                             p.queries, singles[pick], proj, p.loss, &ledger, pick);
        r.subset_estimates = estimate_losses(cache, p.loss, singles, &ledger);
        r.anchor_subsets = {pick};
    } else {
        for (const auto& s : singles)
            r.subset_estimates.push_back(exact_loss(p.model, p.layout, p.demos, p.queries, s, p.loss, &ledger));
    }
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = r.subset_estimates[i].value;
    std::vector<std::size_t> chosen;
    for (std::size_t i : lowest_k(values, cfg.k)) chosen.push_back(pool[i]);
    r.chosen = PromptSubset(std::move(chosen), n);
    r.ledger = ledger.snapshot();
    return r;
}

}  // namespace

SelectionResult select_forward(const SelectionProblem& p, const SelectionConfig& cfg) {
    return forward_impl(p, cfg, true);
}
SelectionResult oracle_forward_selection(const SelectionProblem& p, const SelectionConfig& cfg) {
    return forward_impl(p, cfg, false);
}
SelectionResult select_cross_entropy(const SelectionProblem& p, const SelectionConfig& cfg) {
    return cross_entropy_impl(p, cfg, true);
}
SelectionResult oracle_cross_entropy(const SelectionProblem& p, const SelectionConfig& cfg) {
    return cross_entropy_impl(p, cfg, false);
}

// ---------------------------------------------------------------------------
// Baselines and extensions

namespace {

Vector mean_input_embedding(const EmbeddingLayout& layout, const std::vector<Vector>& xs) {
    if (xs.empty()) throw ValidationError("mean embedding of an empty set");
    Vector mean = Vector::Zero(static_cast<Eigen::Index>(layout.d_emb()));
    for (const auto& x : xs) mean += input_embedding(layout, x);
    return mean / static_cast<double>(xs.size());
}

std::vector<Vector> inputs_of(const std::vector<Example>& items) {
    std::vector<Vector> xs;
    xs.reserve(items.size());
    for (const auto& e : items) xs.push_back(e.x);
    return xs;
}

}  // namespace

std::vector<double> similarity_to_queries(const EmbeddingLayout& layout, const DemoSet& demos,
                                          const QuerySet& queries) {
    const Vector mean = mean_input_embedding(layout, inputs_of(queries));
    std::vector<double> sim(demos.size());
    for (std::size_t i = 0; i < demos.size(); ++i) sim[i] = cosine_similarity(input_embedding(layout, demos[i].x), mean);
    return sim;
}

SelectionResult select_topk(const EmbeddingLayout& layout, const DemoSet& demos, const QuerySet& queries,
                            std::size_t k) {
    if (k < 1 || k > demos.size()) throw ValidationError("top-k: need 1 <= k <= n_demo");
    auto order = order_by(similarity_to_queries(layout, demos, queries), true);
    order.resize(k);
    SelectionResult r;
    r.method = "top-k";
    r.chosen = PromptSubset(std::move(order), demos.size());
    return r;
}

SelectionResult select_random(std::size_t n_demo, std::size_t k, std::uint64_t seed) {
    if (k < 1 || k > n_demo) throw ValidationError("random-k: need 1 <= k <= n_demo");
    Rng rng = Rng(seed).fork("random-k");
    SelectionResult r;
    r.method = "random-k";
    r.chosen = PromptSubset(rng.sample_without_replacement(n_demo, k), n_demo);
    return r;
}

DemoSet pseudo_label(const Model& model, const EmbeddingLayout& layout, const std::vector<Vector>& inputs,
                     const QuerySet& queries, std::size_t k, LossKind kind) {
    if (inputs.empty()) throw ValidationError("pseudo_label: nothing to label");
    if (k < 1 || k > queries.size()) throw ValidationError("pseudo_label: need 1 <= k <= n_queries");
    const Vector target = mean_input_embedding(layout, inputs);
    std::vector<double> sim(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) sim[i] = cosine_similarity(input_embedding(layout, queries[i].x), target);
    auto order = order_by(sim, true);
    order.resize(k);
    const PromptSubset prompt(std::move(order), queries.size());

    DemoSet out(inputs.size());
    parallel_for(inputs.size(), [&](std::size_t i) {
        Vector pred = forward(model, embed(layout, queries, prompt, inputs[i]));
        if (kind == LossKind::Logistic) {
            for (Eigen::Index j = 0; j < pred.size(); ++j) pred[j] = pred[j] > 0.0 ? 1.0 : 0.0;
        }
        out[i] = {inputs[i], std::move(pred)};
    });
    return out;
}

QuerySet nearest_queries(const EmbeddingLayout& layout, const QuerySet& pool, const Vector& test_x,
                         std::size_t pool_size) {
    if (pool_size < 1 || pool_size > pool.size()) throw ValidationError("per-query pool size must lie in [1, n_train]");
    const Vector t = input_embedding(layout, test_x);
    std::vector<double> dist(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) dist[i] = (input_embedding(layout, pool[i].x) - t).squaredNorm();
    auto order = order_by(dist, false);
    order.resize(pool_size);
    std::sort(order.begin(), order.end());
    QuerySet out;
    out.reserve(pool_size);
    for (std::size_t i : order) out.push_back(pool[i]);
    return out;
}

SelectionResult per_query_select(const Model& model, const EmbeddingLayout& layout, const DemoSet& demos,
                                 const QuerySet& pool, const Vector& test_x, std::size_t pool_size,
                                 LossKind kind, const SelectionConfig& cfg) {
    const QuerySet local = nearest_queries(layout, pool, test_x, pool_size);
    auto r = select_random_ensemble(SelectionProblem{model, layout, demos, local, kind}, cfg);
    r.method = "ge-re-per-query";
    return r;
}

}  // namespace iclsel

// SPDX-License-Identifier: Apache-2.0
//
// Evaluation: approximation-error tables, model-evaluation accounting,
// score separation and the noise-injection Hessian-trace probe.

#pragma once

#include "iclsel/core.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace iclsel {

/// Plain copy of a ledger's counters.
struct LedgerSnapshot {
    std::uint64_t forward = 0;
    std::uint64_t backward = 0;
    std::uint64_t vector_ops = 0;

    /// Forward passes count 1, input-gradient passes count 2.
    std::uint64_t forward_equivalents() const { return forward + 2 * backward; }
    std::uint64_t model_calls() const { return forward + backward; }

    friend LedgerSnapshot operator-(const LedgerSnapshot& a, const LedgerSnapshot& b) {
        return {a.forward - b.forward, a.backward - b.backward, a.vector_ops - b.vector_ops};
    }
    friend LedgerSnapshot operator+(const LedgerSnapshot& a, const LedgerSnapshot& b) {
        return {a.forward + b.forward, a.backward + b.backward, a.vector_ops + b.vector_ops};
    }
    friend bool operator==(const LedgerSnapshot&, const LedgerSnapshot&) = default;
};

/// Counts model evaluations. Counters only grow; take snapshots to measure stages.
class FlopLedger {
public:
    void add_forward(std::uint64_t n = 1) { forward_.fetch_add(n, std::memory_order_relaxed); }
    void add_backward(std::uint64_t n = 1) { backward_.fetch_add(n, std::memory_order_relaxed); }
    void add_vector_ops(std::uint64_t n = 1) { vector_ops_.fetch_add(n, std::memory_order_relaxed); }

    LedgerSnapshot snapshot() const {
        return {forward_.load(), backward_.load(), vector_ops_.load()};
    }

private:
    std::atomic<std::uint64_t> forward_{0};
    std::atomic<std::uint64_t> backward_{0};
    std::atomic<std::uint64_t> vector_ops_{0};
};

/// Forward-equivalent ratio baseline / method. Throws when the method cost is zero.
double speedup(const LedgerSnapshot& baseline, const LedgerSnapshot& method);

struct ApproxErrorRecord {
    std::size_t subset_id = 0;
    double exact = 0.0;
    double estimated = 0.0;
    double relative_distance = 0.0;

    /// (h - h_hat)^2 / h^2; NaN when h = 0.
    double relative_squared_error() const;
};

struct DistanceBuckets {
    std::vector<double> edges;  // ascending; bucket i is [edges[i], edges[i+1])
    /// 15%-40% in 5% steps.
    static DistanceBuckets standard();
    /// Index of the bucket containing `distance`, or -1.
    int bucket_of(double distance) const;
};

struct BucketStat {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;
};

struct RelativeErrorTable {
    std::vector<BucketStat> buckets;
    std::size_t excluded_zero_exact = 0;   // records with h = 0
    std::size_t outside_buckets = 0;
    BucketStat overall;                    // all records with h != 0
};

RelativeErrorTable aggregate_relative_error(const std::vector<ApproxErrorRecord>& records,
                                            const DistanceBuckets& buckets = DistanceBuckets::standard());

/// Sum of squared differences. Throws DimensionMismatch on unequal lengths.
double rss_scores(const std::vector<double>& estimated, const std::vector<double>& exact);

struct ScoreSeparation {
    double mean_in = 0.0;
    double mean_out = 0.0;
    double gap = 0.0;  // mean_out - mean_in
};

ScoreSeparation score_separation(const std::vector<double>& scores, const std::vector<bool>& in_distribution);

struct HessianProbeConfig {
    double sigma = 1e-2;
    std::size_t n_samples = 10000;
    std::uint64_t seed = 0;
    void validate() const;
};

struct HessianTraceEstimate {
    double trace = 0.0;
    double standard_error = 0.0;
};

using ScalarFunction = std::function<double(const Vector&)>;

/// tr(H f(x)) ~ (2 / sigma^2) (E[f(x + U)] - f(x)), U ~ N(0, sigma^2 I).
/// Each sample evaluates the antithetic pair x + U, x - U; the pair average
/// has the same expectation and cancels the first-order term exactly.
HessianTraceEstimate hessian_trace(const ScalarFunction& f, const Vector& x,
                                   const HessianProbeConfig& cfg);

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace iclsel

// SPDX-License-Identifier: Apache-2.0

#include "iclsel/metrics.hpp"

#include "iclsel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace iclsel {

double speedup(const LedgerSnapshot& baseline, const LedgerSnapshot& method) {
    if (method.forward_equivalents() == 0) throw std::invalid_argument("speedup: method ledger is empty");
    return static_cast<double>(baseline.forward_equivalents()) /
           static_cast<double>(method.forward_equivalents());
}

double ApproxErrorRecord::relative_squared_error() const {
    if (exact == 0.0) return std::numeric_limits<double>::quiet_NaN();
    const double diff = exact - estimated;
    return diff * diff / (exact * exact);
}

DistanceBuckets DistanceBuckets::standard() { return {{0.15, 0.20, 0.25, 0.30, 0.35, 0.40}}; }

int DistanceBuckets::bucket_of(double distance) const {
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (distance >= edges[i] && distance < edges[i + 1]) return static_cast<int>(i);
    }
    return -1;
}

namespace {

// Two-pass mean / population std over values in a fixed order.
BucketStat summarize(std::vector<double> values, double lo, double hi) {
    BucketStat s{lo, hi, values.size(), 0.0, 0.0};
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());  // order-free result
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / static_cast<double>(values.size()));
    return s;
}

}  // namespace

RelativeErrorTable aggregate_relative_error(const std::vector<ApproxErrorRecord>& records,
                                            const DistanceBuckets& buckets) {
    if (records.empty()) throw std::invalid_argument("aggregate_relative_error: no records");
    RelativeErrorTable table;
    const std::size_t nb = buckets.edges.size() < 2 ? 0 : buckets.edges.size() - 1;
    std::vector<std::vector<double>> per(nb);
    std::vector<double> all;
    for (const auto& r : records) {
        if (r.exact == 0.0) {
            ++table.excluded_zero_exact;
            continue;
        }
        const double e = r.relative_squared_error();
        all.push_back(e);
        const int b = buckets.bucket_of(r.relative_distance);
        if (b < 0) {
            ++table.outside_buckets;
        } else {
            per[static_cast<std::size_t>(b)].push_back(e);
        }
    }
    for (std::size_t i = 0; i < nb; ++i) {
        table.buckets.push_back(summarize(std::move(per[i]), buckets.edges[i], buckets.edges[i + 1]));
    }
    table.overall = summarize(std::move(all), 0.0, std::numeric_limits<double>::infinity());
    return table;
}

double rss_scores(const std::vector<double>& estimated, const std::vector<double>& exact) {
    if (estimated.size() != exact.size()) throw DimensionMismatch("rss_scores: length mismatch");
    std::vector<double> sq(estimated.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = (estimated[i] - exact[i]) * (estimated[i] - exact[i]);
    std::sort(sq.begin(), sq.end());
    return std::accumulate(sq.begin(), sq.end(), 0.0);
}

ScoreSeparation score_separation(const std::vector<double>& scores,
                                 const std::vector<bool>& in_distribution) {
    if (scores.size() != in_distribution.size()) throw DimensionMismatch("score_separation: length mismatch");
    double in_sum = 0.0, out_sum = 0.0;
    std::size_t in_n = 0, out_n = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (in_distribution[i]) {
            in_sum += scores[i];
            ++in_n;
        } else {
            out_sum += scores[i];
            ++out_n;
        }
    }
    ScoreSeparation s;
    s.mean_in = in_n ? in_sum / static_cast<double>(in_n) : 0.0;
    s.mean_out = out_n ? out_sum / static_cast<double>(out_n) : 0.0;
    s.gap = s.mean_out - s.mean_in;
    return s;
}

void HessianProbeConfig::validate() const {
    if (!(sigma > 0.0)) throw ValidationError("hessian probe: sigma must be > 0");
    if (n_samples < 1) throw ValidationError("hessian probe: need at least one sample");
}

HessianTraceEstimate hessian_trace(const ScalarFunction& f, const Vector& x, const HessianProbeConfig& cfg) {
    cfg.validate();
    Rng rng = Rng(cfg.seed).fork("hessian-probe");
    const double f0 = f(x);
    const double scale = 2.0 / (cfg.sigma * cfg.sigma);
    double mean = 0.0, m2 = 0.0;
    for (std::size_t s = 0; s < cfg.n_samples; ++s) {
        const Vector u = rng.normal_vector(static_cast<std::size_t>(x.size()), cfg.sigma);
        const double sample = scale * (0.5 * (f(x + u) + f(x - u)) - f0);
        const double delta = sample - mean;
        mean += delta / static_cast<double>(s + 1);
        m2 += delta * (sample - mean);
    }
    HessianTraceEstimate out;
    out.trace = mean;
    if (cfg.n_samples > 1) {
        out.standard_error = std::sqrt(m2 / static_cast<double>(cfg.n_samples - 1) /
                                       static_cast<double>(cfg.n_samples));
    }
    return out;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j);  // tied ranks share the average
        for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw DimensionMismatch("spearman: need two equal-length series");
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) return 0.0;
    return cov / std::sqrt(va * vb);
}

}  // namespace iclsel

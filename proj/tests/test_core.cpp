// SPDX-License-Identifier: Apache-2.0

#include "helpers.hpp"
#include "iclsel/core.hpp"
#include "iclsel/rng.hpp"

#include <doctest.h>

#include <limits>
#include <set>

using namespace iclsel;

TEST_CASE("well-formed regression data has no violations") {
    Rng rng(1);
    auto demos = test::random_examples(rng, 10, 3);
    auto queries = test::random_examples(rng, 4, 3);
    CHECK(validate_dataset(demos, queries, LossKind::SquaredError).empty());
}

TEST_CASE("non-finite label is reported once") {
    Rng rng(2);
    auto demos = test::random_examples(rng, 10, 3);
    auto queries = test::random_examples(rng, 4, 3);
    demos[4].y[0] = std::numeric_limits<double>::quiet_NaN();
    const auto report = validate_dataset(demos, queries, LossKind::SquaredError);
    REQUIRE(report.size() == 1);
    CHECK(report[0].kind == Violation::Kind::NonFinite);
    CHECK(report[0].where == "demos[4]");
}

TEST_CASE("logistic labels must be 0 or 1") {
    Rng rng(3);
    auto demos = test::random_examples(rng, 3, 2);
    auto queries = test::random_examples(rng, 2, 2);
    for (auto* set : {&demos, &queries})
        for (auto& e : *set) e.y[0] = 1.0;
    demos[1].y[0] = 0.5;
    const auto report = validate_dataset(demos, queries, LossKind::Logistic);
    REQUIRE(report.size() == 1);
    CHECK(report[0].kind == Violation::Kind::LabelDomain);
}

TEST_CASE("dimension mismatches and empty sets are reported") {
    Rng rng(4);
    auto demos = test::random_examples(rng, 3, 2);
    auto queries = test::random_examples(rng, 2, 3);
    const auto report = validate_dataset(demos, queries, LossKind::SquaredError);
    CHECK(report.size() == 2);
    CHECK(validate_dataset(DemoSet{}, queries, LossKind::SquaredError).front().kind == Violation::Kind::Empty);
}

TEST_CASE("prompt subsets enforce distinct in-range indices") {
    CHECK_THROWS_AS(PromptSubset({1, 2, 1}, 5), ValidationError);
    CHECK_THROWS_AS(PromptSubset({0, 5}, 5), ValidationError);
    PromptSubset s({3, 0, 4}, 5);
    CHECK(s.size() == 3);
    CHECK(s[0] == 3);
    CHECK(s.contains(4));
    CHECK_FALSE(s.contains(1));
    CHECK(s.same_set(PromptSubset({0, 4, 3}, 5)));
    CHECK_FALSE(s == PromptSubset({0, 4, 3}, 5));
    CHECK(s.with(1, 5).size() == 4);
    CHECK_THROWS_AS(s.with(3, 5), ValidationError);
}

TEST_CASE("randomly built subsets satisfy the subset invariants") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(40);
        const std::size_t k = rng.below(n + 1);
        PromptSubset s(rng.sample_without_replacement(n, k), n);
        std::set<std::size_t> seen(s.indices().begin(), s.indices().end());
        CHECK(seen.size() == k);
        for (std::size_t q : s.indices()) CHECK(q < n);
    }
}

TEST_CASE("selection config rejects each invariant violation") {
    const std::size_t n = 30;
    auto ok = SelectionConfig::defaults(n, 5);
    CHECK_NOTHROW(ok.validate(n));
    auto expect_bad = [&](auto mutate) {
        auto c = ok;
        mutate(c);
        CHECK_THROWS_AS(c.validate(n), ValidationError);
    };
    expect_bad([](SelectionConfig& c) { c.k = 0; });
    expect_bad([](SelectionConfig& c) { c.k = 31; });
    expect_bad([](SelectionConfig& c) { c.alpha = 0; });
    expect_bad([](SelectionConfig& c) { c.alpha = c.m + 1; });
    expect_bad([](SelectionConfig& c) { c.d_proj = 0; });
    expect_bad([](SelectionConfig& c) { c.t_start = 0; });
    expect_bad([](SelectionConfig& c) { c.k_prefilter = 4; });
    expect_bad([](SelectionConfig& c) { c.k_prefilter = 31; });
    expect_bad([](SelectionConfig& c) { c.score_threshold = std::numeric_limits<double>::infinity(); });
}

TEST_CASE("default selection parameters") {
    auto c = SelectionConfig::defaults(3000, 25, 9);
    CHECK(c.m == 6000);
    CHECK(c.alpha == 5);
    CHECK(c.d_proj == 400);
    CHECK(c.t_start == 4);
    CHECK(c.k_prefilter == 100);
    CHECK(SelectionConfig::defaults(10, 5).m == 500);
    CHECK(SelectionConfig::defaults(10, 5).k_prefilter == 10);
}

TEST_CASE("loss kind names round-trip") {
    CHECK(loss_kind_from_string(to_string(LossKind::Logistic)) == LossKind::Logistic);
    CHECK(loss_kind_from_string("squared") == LossKind::SquaredError);
    CHECK_THROWS_AS(loss_kind_from_string("hinge"), ValidationError);
}

TEST_CASE("named random streams are reproducible and independent") {
    Rng a(42), b(42);
    CHECK(a.fork("demos").next_u64() == b.fork("demos").next_u64());
    CHECK(a.fork("demos").next_u64() != a.fork("queries").next_u64());
    Rng c(7);
    const auto draw = c.sample_without_replacement(10, 10);
    CHECK(std::set<std::size_t>(draw.begin(), draw.end()).size() == 10);
    // Moments of the normal sampler.
    Rng d(8);
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = d.normal();
        s += z;
        s2 += z * z;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(std::abs(s2 / n - 1.0) < 0.01);
}

// SPDX-License-Identifier: Apache-2.0

#include "helpers.hpp"
#include "iclsel/embedding.hpp"

#include <doctest.h>

using namespace iclsel;

namespace {

struct Fixture {
    Rng rng{11};
    EmbeddingLayout layout{7, 3, 1};
    DemoSet demos = test::random_examples(rng, 12, 3);
    Vector x = rng.normal_vector(3);
};

}  // namespace

TEST_CASE("layout sizes") {
    EmbeddingLayout l(7, 3, 2);
    CHECK(l.token_dim() == 6);
    CHECK(l.d_emb() == 48);
    CHECK(l.query_offset() == 42);
    CHECK_THROWS_AS(EmbeddingLayout(0, 3, 1), ValidationError);
}

TEST_CASE("empty prompt leaves only the query slot") {
    Fixture f;
    const auto e = embed(f.layout, f.demos, PromptSubset({}, 12), f.x);
    CHECK(e.head(static_cast<Eigen::Index>(f.layout.query_offset())).isZero(0));
    const auto q = e.tail(static_cast<Eigen::Index>(f.layout.token_dim()));
    CHECK(q.head(3) == f.x);
    CHECK(q[3] == 0.0);
    CHECK(q[4] == 1.0);
}

TEST_CASE("full prompt has no padding and fills slots in subset order") {
    Fixture f;
    PromptSubset s({5, 0, 9, 1, 2, 3, 4}, 12);
    const auto e = embed(f.layout, f.demos, s, f.x);
    const auto t = static_cast<Eigen::Index>(f.layout.token_dim());
    for (std::size_t j = 0; j < 7; ++j) {
        const auto tok = e.segment(static_cast<Eigen::Index>(j) * t, t);
        CHECK(tok.head(3) == f.demos[s[j]].x);
        CHECK(tok[3] == f.demos[s[j]].y[0]);
        CHECK(tok[4] == 1.0);
    }
}

TEST_CASE("prompts of different sizes embed to the same length") {
    Fixture f;
    const auto a = embed(f.layout, f.demos, PromptSubset({1, 2, 3}, 12), f.x);
    const auto b = embed(f.layout, f.demos, PromptSubset({1, 2, 3, 4, 5, 6, 7}, 12), f.x);
    CHECK(a.size() == b.size());
    CHECK(static_cast<std::size_t>(a.size()) == f.layout.d_emb());
}

TEST_CASE("embed rejects oversize subsets and wrong dimensions") {
    Fixture f;
    CHECK_THROWS_AS(embed(f.layout, f.demos, PromptSubset({0, 1, 2, 3, 4, 5, 6, 7}, 12), f.x), ValidationError);
    CHECK_THROWS_AS(embed(f.layout, f.demos, PromptSubset({0}, 12), Vector::Zero(4)), DimensionMismatch);
}

TEST_CASE("demonstration part plus query token equals the full embedding") {
    Fixture f;
    PromptSubset s({4, 2}, 12);
    Vector e = embed_demonstrations(f.layout, f.demos, s) + input_embedding(f.layout, f.x);
    CHECK(e == embed(f.layout, f.demos, s, f.x));
}

TEST_CASE("displacement only involves slots where prompts differ") {
    Fixture f;
    const auto a = embed(f.layout, f.demos, PromptSubset({1, 2, 3}, 12), f.x);
    const auto b = embed(f.layout, f.demos, PromptSubset({1, 8, 3}, 12), f.x);
    const Vector d = a - b;
    const auto t = static_cast<Eigen::Index>(f.layout.token_dim());
    for (Eigen::Index slot = 0; slot < static_cast<Eigen::Index>(f.layout.slots()); ++slot) {
        const bool zero = d.segment(slot * t, t).isZero(0);
        CHECK(zero == (slot != 1));
    }
}

TEST_CASE("distinct demonstrations give distinct embeddings") {
    Fixture f;
    for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t j = i + 1; j < 12; ++j)
            CHECK(embed(f.layout, f.demos, PromptSubset({i}, 12), f.x) !=
                  embed(f.layout, f.demos, PromptSubset({j}, 12), f.x));
}

TEST_CASE("relative distance") {
    Vector e0(3);
    e0 << 1, 2, 2;
    CHECK(relative_distance(e0, e0) == 0.0);
    CHECK(relative_distance(2 * e0, e0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(relative_distance(e0, Vector::Zero(3)), std::invalid_argument);
    CHECK_THROWS_AS(relative_distance(Vector::Zero(2), e0), DimensionMismatch);
}

TEST_CASE("cosine similarity") {
    Vector a(2), b(2);
    a << 1, 0;
    b << 0, 3;
    CHECK(cosine_similarity(a, b) == 0.0);
    CHECK(cosine_similarity(a, 5 * a) == doctest::Approx(1.0));
    CHECK(cosine_similarity(a, Vector::Zero(2)) == 0.0);
}

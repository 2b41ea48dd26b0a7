// SPDX-License-Identifier: Apache-2.0
//
// Portable random streams. The engine is std::mt19937_64 (its output sequence
// is fixed by the standard); all distributions are implemented here so that
// draws do not depend on the standard library vendor.
//
// Stream splitting: fork(tag) seeds a child engine with
//   splitmix64(seed ^ splitmix64(fnv1a64(tag)))
// so named streams (e.g. "demos", "queries") are independent of each other
// and of the order in which they are created.

#pragma once

#include "iclsel/core.hpp"

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace iclsel {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    Rng fork(std::string_view tag) const;
    Rng fork(std::uint64_t tag) const;

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal via Box-Muller (one draw per two uniforms).
    double normal();
    /// Uniform integer in [0, n), rejection sampled.
    std::size_t below(std::size_t n);

    Vector normal_vector(std::size_t n, double stddev = 1.0);
    Matrix normal_matrix(std::size_t rows, std::size_t cols, double stddev = 1.0);

    /// k distinct indices from [0, n) in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[below(i)]);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace iclsel

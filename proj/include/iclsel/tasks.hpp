// SPDX-License-Identifier: Apache-2.0
//
// Synthetic regression tasks: mixtures of linear functions or of random
// two-layer ReLU teachers, with the generating component of every example.

#pragma once

#include "iclsel/core.hpp"
#include "iclsel/models.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace iclsel {

enum class NoiseKind { None, Gaussian };
enum class TaskFamily { Linear, Relu };

struct TaskSpec {
    TaskFamily family = TaskFamily::Linear;
    std::size_t d_in = 20;
    std::size_t n_components = 1;
    NoiseKind noise = NoiseKind::None;
    double noise_std = 1.0;
    std::size_t n_demo = 100;
    std::size_t n_train = 100;
    std::size_t n_test = 100;
    /// Demonstrations per component; empty means an even split (remainder to
    /// the first components). Must sum to n_demo when given.
    std::vector<std::size_t> component_counts;
    std::uint64_t seed = 0;

    // ReLU teachers: W1 ~ N(0, 1/d_in), W2 ~ N(0, output_scale^2 / hidden).
    std::size_t relu_hidden = 32;
    double relu_output_scale = 1.0;
    double relu_output_bias = 0.0;

    void validate() const;

    /// 3 linear components, 3000 demonstrations, 100 queries.
    static TaskSpec mixture(std::uint64_t seed = 0);
};

/// A dataset plus the component that generated each example. Queries and test
/// examples always come from component 0.
struct LabeledDataset {
    Dataset data;
    std::vector<std::size_t> demo_component;
    std::vector<std::size_t> query_component;
    std::vector<std::size_t> test_component;
    std::vector<Vector> betas;           // linear family only
    std::vector<TwoLayerReLU> teachers;  // ReLU family only
    std::uint64_t seed = 0;

    /// true for demonstrations drawn from component 0.
    std::vector<bool> in_distribution() const;
};

LabeledDataset gen_linear_family(const TaskSpec& spec);
LabeledDataset gen_relu_family(const TaskSpec& spec);
/// Dispatches on spec.family.
LabeledDataset generate_task(const TaskSpec& spec);

/// Each demonstration repeated `copies` times in place (d0, d0, d1, d1, ...).
LabeledDataset duplicate_demos(const LabeledDataset& dataset, std::size_t copies);

}  // namespace iclsel

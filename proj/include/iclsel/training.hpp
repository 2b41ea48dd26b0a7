// SPDX-License-Identifier: Apache-2.0
//
// Training the in-context attention model on freshly sampled linear tasks.

#pragma once

#include "iclsel/attention.hpp"
#include "iclsel/embedding.hpp"
#include "iclsel/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace iclsel {

enum class OptimizerKind { Sgd, Adam };

struct TrainingConfig {
    std::size_t steps = 4000;  // 0 returns the initialization unchanged
    std::size_t batch_size = 32;
    double learning_rate = 5e-4;
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::Adam;
    std::size_t n_layers = 8;
    double clip_norm = 1.0;     // global gradient-norm clip, <= 0 disables
    double init_x_step = 0.1;
    double init_y_step = 0.5;
    std::size_t trace_every = 50;

    void validate() const;
};

/// One prompt: its embedding and the query's target.
struct TrainingPrompt {
    EmbeddingVector embedding;
    Vector target;
};

/// Draws y = <beta, x> + noise tasks with beta, x ~ N(0, I_d) and a prompt
/// length uniform in [k_min, k_max].
class LinearTaskSampler {
public:
    LinearTaskSampler(std::size_t d_in, std::size_t k_min, std::size_t k_max, double noise_std = 0.0);

    const EmbeddingLayout& layout() const { return layout_; }
    std::size_t k_min() const { return k_min_; }
    double noise_std() const { return noise_std_; }

    TrainingPrompt sample(Rng& rng) const;
    /// Fixed prompt length k (k_min <= k <= k_max not required, only k <= k_max).
    TrainingPrompt sample(Rng& rng, std::size_t k) const;

private:
    EmbeddingLayout layout_;
    std::size_t k_min_;
    double noise_std_;
};

class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(std::size_t step, double value);
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

struct TrainingResult {
    LinearAttentionICL model;
    std::vector<std::pair<std::size_t, double>> loss_trace;  // (step, mean squared error)
};

TrainingResult train_icl_model(const TrainingConfig& config, const LinearTaskSampler& sampler);

/// Mean squared query error of `model` over `n_prompts` fresh prompts of length k.
double held_out_error(const LinearAttentionICL& model, const LinearTaskSampler& sampler,
                      std::size_t k, std::size_t n_prompts, std::uint64_t seed);

}  // namespace iclsel

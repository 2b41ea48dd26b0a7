// SPDX-License-Identifier: Apache-2.0

#include "iclsel/training.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace iclsel {

void TrainingConfig::validate() const {
    if (batch_size == 0) throw ValidationError("training: batch size must be >= 1");
    if (!(learning_rate > 0.0)) throw ValidationError("training: learning rate must be > 0");
    if (n_layers == 0) throw ValidationError("training: need at least one attention layer");
}

LinearTaskSampler::LinearTaskSampler(std::size_t d_in, std::size_t k_min, std::size_t k_max,
                                     double noise_std)
    : layout_(k_max, d_in, 1), k_min_(k_min), noise_std_(noise_std) {
    if (k_min == 0 || k_min > k_max) throw ValidationError("task sampler: need 1 <= k_min <= k_max");
    if (noise_std < 0.0) throw ValidationError("task sampler: negative noise");
}

TrainingPrompt LinearTaskSampler::sample(Rng& rng) const {
    const std::size_t k = k_min_ + rng.below(layout_.k_max - k_min_ + 1);
    return sample(rng, k);
}

TrainingPrompt LinearTaskSampler::sample(Rng& rng, std::size_t k) const {
    const std::size_t d = layout_.d_in;
    const Vector beta = rng.normal_vector(d);
    DemoSet demos;
    demos.reserve(k);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < k; ++i) {
        Vector x = rng.normal_vector(d);
        Vector y(1);
        y[0] = beta.dot(x) + (noise_std_ > 0.0 ? noise_std_ * rng.normal() : 0.0);
        demos.push_back({std::move(x), std::move(y)});
        idx.push_back(i);
    }
    const Vector xq = rng.normal_vector(d);
    Vector target(1);
    target[0] = beta.dot(xq) + (noise_std_ > 0.0 ? noise_std_ * rng.normal() : 0.0);
    return {embed(layout_, demos, PromptSubset(std::move(idx), k), xq), std::move(target)};
}

TrainingDiverged::TrainingDiverged(std::size_t step, double value)
    : std::runtime_error("training diverged at step " + std::to_string(step) + " (loss " +
                         std::to_string(value) + ")"),
      step_(step) {}

namespace {

// Flat views over the parameter blocks so the optimizer can treat them uniformly.
template <typename Fn>
void for_each_block(LinearAttentionICL& model, LinearAttentionICL::Gradients& g, Fn&& fn) {
    auto& layers = model.mutable_layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        fn(layers[l].value, g.layers[l].value);
        fn(layers[l].key_query, g.layers[l].key_query);
    }
    fn(model.mutable_readout(), g.readout);
}

}  // namespace

TrainingResult train_icl_model(const TrainingConfig& config, const LinearTaskSampler& sampler) {
    config.validate();
    const auto& layout = sampler.layout();
    TrainingResult result{LinearAttentionICL::descent_init(layout.d_in, layout.d_out, config.n_layers,
                                                           config.init_x_step, config.init_y_step),
                          {}};
    if (config.steps == 0) return result;

    LinearAttentionICL& model = result.model;
    Rng rng = Rng(config.seed).fork("training-tasks");

    LinearAttentionICL::Gradients grad, first, second;
    grad.set_zero_like(model);
    first.set_zero_like(model);
    second.set_zero_like(model);
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    double running = 0.0;
    std::size_t running_count = 0;
    for (std::size_t step = 0; step < config.steps; ++step) {
        grad.set_zero_like(model);
        double batch_loss = 0.0;
        for (std::size_t b = 0; b < config.batch_size; ++b) {
            const TrainingPrompt p = sampler.sample(rng);
            batch_loss += 2.0 * model.accumulate_squared_error(p.embedding, p.target, grad);
        }
        batch_loss /= static_cast<double>(config.batch_size);
        if (!std::isfinite(batch_loss)) throw TrainingDiverged(step, batch_loss);
        // d/dtheta of mean (f - y)^2 is 2/B times the accumulated residual gradient.
        grad.scale(2.0 / static_cast<double>(config.batch_size));
        if (config.clip_norm > 0.0) {
            const double norm = std::sqrt(grad.squared_norm());
            if (!std::isfinite(norm)) throw TrainingDiverged(step, norm);
            if (norm > config.clip_norm) grad.scale(config.clip_norm / norm);
        }

        // cosine decay to zero over the run
        const double progress = static_cast<double>(step) / static_cast<double>(config.steps);
        const double lr = config.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));

        if (config.optimizer == OptimizerKind::Sgd) {
            for_each_block(model, grad, [&](Matrix& w, Matrix& g) { w -= lr * g; });
        } else {
            const double t = static_cast<double>(step + 1);
            const double c1 = 1.0 - std::pow(beta1, t);
            const double c2 = 1.0 - std::pow(beta2, t);
            std::size_t block = 0;
            std::vector<Matrix*> m_blocks, v_blocks;
            for_each_block(model, first, [&](Matrix&, Matrix& m) { m_blocks.push_back(&m); });
            for_each_block(model, second, [&](Matrix&, Matrix& v) { v_blocks.push_back(&v); });
            for_each_block(model, grad, [&](Matrix& w, Matrix& g) {
                Matrix& m = *m_blocks[block];
                Matrix& v = *v_blocks[block];
                ++block;
                m = beta1 * m + (1.0 - beta1) * g;
                v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
                w.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
            });
        }

        running += batch_loss;
        ++running_count;
        if (config.trace_every > 0 && ((step + 1) % config.trace_every == 0 || step + 1 == config.steps)) {
            result.loss_trace.emplace_back(step + 1, running / static_cast<double>(running_count));
            running = 0.0;
            running_count = 0;
        }
    }
    model.mark_trained();
    return result;
}

double held_out_error(const LinearAttentionICL& model, const LinearTaskSampler& sampler,
                      std::size_t k, std::size_t n_prompts, std::uint64_t seed) {
    Rng rng = Rng(seed).fork("held-out");
    double total = 0.0;
    for (std::size_t i = 0; i < n_prompts; ++i) {
        const TrainingPrompt p = sampler.sample(rng, k);
        total += (model.forward(p.embedding) - p.target).squaredNorm();
    }
    return total / static_cast<double>(n_prompts);
}

}  // namespace iclsel

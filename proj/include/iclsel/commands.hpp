// SPDX-License-Identifier: Apache-2.0
//
// Experiment commands behind the `iclsel` binary. Each command is a pure
// function of its configuration: outputs carry the seed and a digest of the
// resolved configuration, and contain no timestamps or host details.

#pragma once

#include "iclsel/io.hpp"
#include "iclsel/selection.hpp"
#include "iclsel/tasks.hpp"
#include "iclsel/training.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace iclsel {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "ICLSEL_OUTPUT_DIR";

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::string dataset;   // dataset file
    std::string model;     // model.v1 file
    std::string labels;    // component sidecar (optional)
    std::string output_dir;

    TaskSpec task;

    // Selection; m = 0 and k_prefilter = 0 mean "use the documented defaults".
    std::size_t m = 0;
    std::size_t k = 5;
    std::size_t alpha = 5;
    std::size_t d_proj = 400;
    std::size_t t_start = 4;
    std::size_t k_prefilter = 0;
    std::optional<double> score_threshold;
    bool identity_projection = false;
    std::string anchor_policy = "random";

    // Model construction.
    std::string model_kind = "linear_attention";
    TrainingConfig training;
    std::size_t train_k_min = 20;
    std::size_t train_k_max = 50;
    double train_noise_std = 0.0;
    std::size_t relu_hidden = 64;

    std::vector<std::string> methods{"ge-re", "top-k", "random-k"};
    std::vector<std::size_t> k_values;   // sweeps; empty means {k}
    std::string subset_mode = "random";  // estimate: "random" or "local"
    std::size_t max_swaps = 0;           // local mode; 0 means k / 2
    HessianProbeConfig hessian{1e-2, 2000, 0};

    /// Resolved selection settings for a dataset of n_demo demonstrations.
    SelectionConfig selection(std::size_t n_demo, std::size_t k_override = 0) const;
    std::vector<std::size_t> sweep() const { return k_values.empty() ? std::vector<std::size_t>{k} : k_values; }

    Json to_json() const;
    /// Missing keys keep their defaults. Unknown keys are rejected.
    static ExperimentConfig from_json(const Json& j);
};

/// Output directory: config value, then $ICLSEL_OUTPUT_DIR, then ".".
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

/// Runs `name` on the problem. Methods: ge-re, ge-fs, ge-ce, oracle-re,
/// oracle-fs, oracle-ce, top-k, random-k.
SelectionResult run_method(const std::string& name, const SelectionProblem& p, const SelectionConfig& cfg);
const std::vector<std::string>& known_methods();

void cmd_gen_task(const ExperimentConfig& cfg);
void cmd_train_model(const ExperimentConfig& cfg);
void cmd_estimate(const ExperimentConfig& cfg);
void cmd_select(const ExperimentConfig& cfg);
void cmd_evaluate(const ExperimentConfig& cfg);
void cmd_bench_flops(const ExperimentConfig& cfg);
void cmd_hessian(const ExperimentConfig& cfg);

/// Dispatch by subcommand name; throws ValidationError for unknown names.
void run_command(const std::string& name, const ExperimentConfig& cfg);
const std::vector<std::string>& command_names();

}  // namespace iclsel

// SPDX-License-Identifier: Apache-2.0
//
// iclsel: demonstration selection experiments.
//
//   iclsel <command> [--config FILE] [flags]
//
// Flags override values from the config file. Exit codes: 0 success,
// 1 invalid input or configuration, 2 runtime failure.

#include "iclsel/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using iclsel::Json;

// Flag values are stored as optionals so that only flags given on the
// command line override the config file.
struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> dataset, model, labels, out, method, model_kind, family, noise, anchor_policy, subset_mode;
    std::optional<std::vector<std::string>> methods;
    std::optional<std::vector<std::size_t>> k_values;
    std::optional<std::size_t> m, k, alpha, d_proj, t_start, k_prefilter, steps, layers, train_k_min, train_k_max,
        n_demo, n_train, n_test, components, d_in, samples, max_swaps, batch_size;
    std::optional<double> threshold, sigma, learning_rate, train_noise;
    bool identity_projection = false;
    std::vector<std::string> sets;
};

void add_options(CLI::App& app, Flags& f) {
    app.add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--seed", f.seed, "global seed");
    app.add_option("--dataset", f.dataset, "dataset file");
    app.add_option("--model", f.model, "model.v1 file");
    app.add_option("--labels", f.labels, "component-label sidecar");
    app.add_option("--out", f.out, "output directory");
    app.add_option("--method", f.method, "single selection method");
    app.add_option("--methods", f.methods, "selection methods")->delimiter(',');
    app.add_option("--k-values", f.k_values, "prompt sizes to sweep")->delimiter(',');
    app.add_option("--m", f.m, "sampled subsets");
    app.add_option("--k", f.k, "subset size");
    app.add_option("--alpha", f.alpha, "anchor subsets");
    app.add_option("--d-proj", f.d_proj, "projection dimension");
    app.add_option("--t-start", f.t_start, "first estimated forward-selection size");
    app.add_option("--k-prefilter", f.k_prefilter, "cross-entropy candidate pool");
    app.add_option("--threshold", f.threshold, "select all demonstrations scoring at most this");
    app.add_flag("--identity-projection", f.identity_projection, "skip the random projection");
    app.add_option("--anchor-policy", f.anchor_policy, "random | mean-embedding");
    app.add_option("--subset-mode", f.subset_mode, "estimate: random | local");
    app.add_option("--max-swaps", f.max_swaps, "estimate: local-mode swap limit");
    app.add_option("--model-kind", f.model_kind, "linear_attention | affine | relu2");
    app.add_option("--steps", f.steps, "training steps");
    app.add_option("--batch-size", f.batch_size, "training batch size");
    app.add_option("--learning-rate", f.learning_rate, "training learning rate");
    app.add_option("--layers", f.layers, "attention layers");
    app.add_option("--train-k-min", f.train_k_min, "shortest training prompt");
    app.add_option("--train-k-max", f.train_k_max, "longest training prompt (prompt capacity)");
    app.add_option("--train-noise", f.train_noise, "label noise of training tasks");
    app.add_option("--family", f.family, "task family: linear | relu");
    app.add_option("--noise", f.noise, "task noise: none | gaussian");
    app.add_option("--n-demo", f.n_demo, "demonstrations");
    app.add_option("--n-train", f.n_train, "training queries");
    app.add_option("--n-test", f.n_test, "test queries");
    app.add_option("--components", f.components, "generating functions");
    app.add_option("--d-in", f.d_in, "input dimension");
    app.add_option("--sigma", f.sigma, "hessian probe noise scale");
    app.add_option("--samples", f.samples, "hessian probe samples");
    app.add_option("--set", f.sets, "override any config key: path.to.key=JSON");
}

template <typename T>
void put(Json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

Json merged_config(const Flags& f) {
    Json j = f.config.empty() ? Json::object() : iclsel::read_json_file(f.config);
    if (!j.is_object()) throw iclsel::ValidationError("config file must hold a JSON object");
    put(j, "seed", f.seed);
    put(j, "dataset", f.dataset);
    put(j, "model", f.model);
    put(j, "labels", f.labels);
    put(j, "output_dir", f.out);
    if (f.method) j["methods"] = std::vector<std::string>{*f.method};
    put(j, "methods", f.methods);
    put(j, "k_values", f.k_values);
    put(j, "m", f.m);
    put(j, "k", f.k);
    put(j, "alpha", f.alpha);
    put(j, "d_proj", f.d_proj);
    put(j, "t_start", f.t_start);
    put(j, "k_prefilter", f.k_prefilter);
    put(j, "score_threshold", f.threshold);
    if (f.identity_projection) j["identity_projection"] = true;
    put(j, "anchor_policy", f.anchor_policy);
    put(j, "subset_mode", f.subset_mode);
    put(j, "max_swaps", f.max_swaps);
    put(j, "model_kind", f.model_kind);
    Json& tr = j["training"];
    if (tr.is_null()) tr = Json::object();
    put(tr, "steps", f.steps);
    put(tr, "batch_size", f.batch_size);
    put(tr, "learning_rate", f.learning_rate);
    put(tr, "layers", f.layers);
    put(tr, "k_min", f.train_k_min);
    put(tr, "k_max", f.train_k_max);
    put(tr, "noise_std", f.train_noise);
    Json& task = j["task"];
    if (task.is_null()) task = Json::object();
    put(task, "family", f.family);
    put(task, "noise", f.noise);
    put(task, "n_demo", f.n_demo);
    put(task, "n_train", f.n_train);
    put(task, "n_test", f.n_test);
    put(task, "n_components", f.components);
    put(task, "d_in", f.d_in);
    Json& h = j["hessian"];
    if (h.is_null()) h = Json::object();
    put(h, "sigma", f.sigma);
    put(h, "samples", f.samples);
    for (const auto& s : f.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw iclsel::ValidationError("--set expects key=value, got '" + s + "'");
        Json value;
        try {
            value = Json::parse(s.substr(eq + 1));
        } catch (const nlohmann::json::parse_error&) {
            value = s.substr(eq + 1);  // bare strings need no quotes
        }
        std::string path = "/" + s.substr(0, eq);
        std::replace(path.begin(), path.end(), '.', '/');
        j[Json::json_pointer(path)] = value;
    }
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Demonstration subset selection by first-order loss estimation"};
    app.require_subcommand(1);
    Flags flags;
    add_options(app, flags);
    for (const auto& name : iclsel::command_names()) app.add_subcommand(name)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const auto cfg = iclsel::ExperimentConfig::from_json(merged_config(flags));
        iclsel::run_command(command, cfg);
    } catch (const std::invalid_argument& e) {  // ValidationError, DimensionMismatch
        std::cerr << "iclsel " << command << ": " << e.what() << "\n";
        return 1;
    } catch (const iclsel::FormatError& e) {
        std::cerr << "iclsel " << command << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "iclsel " << command << ": " << e.what() << "\n";
        return 2;
    }
    return 0;
}

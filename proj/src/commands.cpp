// SPDX-License-Identifier: Apache-2.0

#include "iclsel/commands.hpp"

#include "iclsel/gradest.hpp"
#include "iclsel/rng.hpp"
#include "iclsel/sharpness.hpp"

#include <cstdlib>
#include <map>
#include <set>

namespace iclsel {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

SelectionConfig ExperimentConfig::selection(std::size_t n_demo, std::size_t k_override) const {
    const std::size_t kk = k_override ? k_override : k;
    SelectionConfig s = SelectionConfig::defaults(n_demo, kk, seed);
    if (m) s.m = m;
    s.alpha = alpha;
    s.d_proj = d_proj;
    s.t_start = t_start;
    if (k_prefilter) s.k_prefilter = k_prefilter;
    s.score_threshold = score_threshold;
    s.identity_projection = identity_projection;
    if (anchor_policy == "random") {
        s.anchor_policy = AnchorPolicy::Random;
    } else if (anchor_policy == "mean-embedding") {
        s.anchor_policy = AnchorPolicy::MeanEmbedding;
    } else {
        throw ValidationError("anchor_policy must be 'random' or 'mean-embedding'");
    }
    s.validate(n_demo);
    return s;
}

Json ExperimentConfig::to_json() const {
    Json j;
    j["seed"] = seed;
    j["dataset"] = dataset;
    j["model"] = model;
    j["labels"] = labels;
    j["output_dir"] = output_dir;
    j["task"] = {{"family", task.family == TaskFamily::Linear ? "linear" : "relu"},
                 {"d_in", task.d_in},
                 {"n_components", task.n_components},
                 {"noise", task.noise == NoiseKind::None ? "none" : "gaussian"},
                 {"noise_std", task.noise_std},
                 {"n_demo", task.n_demo},
                 {"n_train", task.n_train},
                 {"n_test", task.n_test},
                 {"component_counts", task.component_counts},
                 {"relu_hidden", task.relu_hidden},
                 {"relu_output_scale", task.relu_output_scale},
                 {"relu_output_bias", task.relu_output_bias}};
    j["m"] = m;
    j["k"] = k;
    j["alpha"] = alpha;
    j["d_proj"] = d_proj;
    j["t_start"] = t_start;
    j["k_prefilter"] = k_prefilter;
    j["score_threshold"] = score_threshold ? Json(*score_threshold) : Json(nullptr);
    j["identity_projection"] = identity_projection;
    j["anchor_policy"] = anchor_policy;
    j["model_kind"] = model_kind;
    j["training"] = {{"steps", training.steps},
                     {"batch_size", training.batch_size},
                     {"learning_rate", training.learning_rate},
                     {"optimizer", training.optimizer == OptimizerKind::Adam ? "adam" : "sgd"},
                     {"layers", training.n_layers},
                     {"clip_norm", training.clip_norm},
                     {"k_min", train_k_min},
                     {"k_max", train_k_max},
                     {"noise_std", train_noise_std},
                     {"relu_hidden", relu_hidden}};
    j["methods"] = methods;
    j["k_values"] = k_values;
    j["subset_mode"] = subset_mode;
    j["max_swaps"] = max_swaps;
    j["hessian"] = {{"sigma", hessian.sigma}, {"samples", hessian.n_samples}};
    return j;
}

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object()) throw ValidationError("config" + where + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) throw ValidationError("config" + where + ": unknown key '" + key + "'");
    }
}

template <typename T>
void read(const Json& j, const char* key, T& dst) {
    if (!j.contains(key) || j.at(key).is_null()) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(std::string("config: '") + key + "' has the wrong type");
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
    ExperimentConfig c;
    reject_unknown(j,
                   {"seed", "dataset", "model", "labels", "output_dir", "task", "m", "k", "alpha", "d_proj", "t_start",
                    "k_prefilter", "score_threshold", "identity_projection", "anchor_policy", "model_kind", "training",
                    "methods", "k_values", "subset_mode", "max_swaps", "hessian"},
                   "");
    read(j, "seed", c.seed);
    read(j, "dataset", c.dataset);
    read(j, "model", c.model);
    read(j, "labels", c.labels);
    read(j, "output_dir", c.output_dir);
    if (j.contains("task")) {
        const Json& t = j.at("task");
        reject_unknown(t,
                       {"family", "d_in", "n_components", "noise", "noise_std", "n_demo", "n_train", "n_test",
                        "component_counts", "relu_hidden", "relu_output_scale", "relu_output_bias"},
                       ".task");
        std::string family = "linear", noise = "none";
        read(t, "family", family);
        read(t, "noise", noise);
        if (family != "linear" && family != "relu") throw ValidationError("task.family must be 'linear' or 'relu'");
        if (noise != "none" && noise != "gaussian") throw ValidationError("task.noise must be 'none' or 'gaussian'");
        c.task.family = family == "linear" ? TaskFamily::Linear : TaskFamily::Relu;
        c.task.noise = noise == "none" ? NoiseKind::None : NoiseKind::Gaussian;
        read(t, "d_in", c.task.d_in);
        read(t, "n_components", c.task.n_components);
        read(t, "noise_std", c.task.noise_std);
        read(t, "n_demo", c.task.n_demo);
        read(t, "n_train", c.task.n_train);
        read(t, "n_test", c.task.n_test);
        read(t, "component_counts", c.task.component_counts);
        read(t, "relu_hidden", c.task.relu_hidden);
        read(t, "relu_output_scale", c.task.relu_output_scale);
        read(t, "relu_output_bias", c.task.relu_output_bias);
    }
    read(j, "m", c.m);
    read(j, "k", c.k);
    read(j, "alpha", c.alpha);
    read(j, "d_proj", c.d_proj);
    read(j, "t_start", c.t_start);
    read(j, "k_prefilter", c.k_prefilter);
    if (j.contains("score_threshold") && !j.at("score_threshold").is_null()) {
        double v = 0.0;
        read(j, "score_threshold", v);
        c.score_threshold = v;
    }
    read(j, "identity_projection", c.identity_projection);
    read(j, "anchor_policy", c.anchor_policy);
    read(j, "model_kind", c.model_kind);
    if (j.contains("training")) {
        const Json& t = j.at("training");
        reject_unknown(t,
                       {"steps", "batch_size", "learning_rate", "optimizer", "layers", "clip_norm", "k_min", "k_max",
                        "noise_std", "relu_hidden"},
                       ".training");
        read(t, "steps", c.training.steps);
        read(t, "batch_size", c.training.batch_size);
        read(t, "learning_rate", c.training.learning_rate);
        std::string opt = "adam";
        read(t, "optimizer", opt);
        if (opt != "adam" && opt != "sgd") throw ValidationError("training.optimizer must be 'adam' or 'sgd'");
        c.training.optimizer = opt == "adam" ? OptimizerKind::Adam : OptimizerKind::Sgd;
        read(t, "layers", c.training.n_layers);
        read(t, "clip_norm", c.training.clip_norm);
        read(t, "k_min", c.train_k_min);
        read(t, "k_max", c.train_k_max);
        read(t, "noise_std", c.train_noise_std);
        read(t, "relu_hidden", c.relu_hidden);
    }
    read(j, "methods", c.methods);
    read(j, "k_values", c.k_values);
    read(j, "subset_mode", c.subset_mode);
    read(j, "max_swaps", c.max_swaps);
    if (j.contains("hessian")) {
        const Json& h = j.at("hessian");
        reject_unknown(h, {"sigma", "samples"}, ".hessian");
        read(h, "sigma", c.hessian.sigma);
        read(h, "samples", c.hessian.n_samples);
    }
    c.task.seed = c.seed;
    c.training.seed = c.seed;
    c.hessian.seed = c.seed;
    return c;
}

fs::path resolve_output_dir(const ExperimentConfig& cfg) {
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return ".";
}

// ---------------------------------------------------------------------------
// Shared plumbing

namespace {

struct Loaded {
    Dataset data;
    ModelBundle bundle;
    std::vector<std::size_t> demo_component;  // empty without a labels file
};

Loaded load_inputs(const ExperimentConfig& cfg, bool need_model = true) {
    if (cfg.dataset.empty()) throw ValidationError("a dataset file is required (--dataset)");
    Loaded in{dataset_from_json(read_json_file(cfg.dataset)),
              {AffineModel(Matrix::Zero(1, 1), Vector::Zero(1)), EmbeddingLayout(1, 1, 1)},
              {}};
    if (need_model) {
        if (cfg.model.empty()) throw ValidationError("a model file is required (--model)");
        in.bundle = model_from_json(read_json_file(cfg.model));
        if (in.bundle.layout.d_in != in.data.d_in || in.bundle.layout.d_out != in.data.d_out) {
            throw ValidationError("model and dataset dimensions disagree");
        }
    }
    if (!cfg.labels.empty()) {
        const Json l = read_json_file(cfg.labels);
        in.demo_component = l.at("demo_component").get<std::vector<std::size_t>>();
        if (in.demo_component.size() != in.data.demos.size()) {
            throw ValidationError("labels file does not match the dataset");
        }
    }
    return in;
}

struct Writer {
    fs::path dir;
    std::uint64_t seed;
    std::string digest;

    explicit Writer(const ExperimentConfig& cfg)
        : dir(resolve_output_dir(cfg)), seed(cfg.seed), digest(config_digest(cfg.to_json())) {
        if (!fs::is_directory(dir)) throw ValidationError("output directory " + dir.string() + " does not exist");
    }

    void csv(const std::string& name, CsvTable table) const {
        table.add_comment("seed", std::to_string(seed));
        table.add_comment("config_digest", digest);
        write_file_atomic(dir / name, table.render());
    }
    void json(const std::string& name, Json j) const {
        j["seed"] = seed;
        j["config_digest"] = digest;
        write_file_atomic(dir / name, j.dump(1) + "\n");
    }
};

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }

double in_distribution_fraction(const PromptSubset& s, const std::vector<std::size_t>& comp) {
    if (comp.empty() || s.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::size_t in = 0;
    for (std::size_t q : s.indices()) in += comp[q] == 0;
    return static_cast<double>(in) / static_cast<double>(s.size());
}

double error_rate(const Model& model, const EmbeddingLayout& layout, const DemoSet& demos, const PromptSubset& s,
                  const QuerySet& qs, LossKind kind) {
    if (kind != LossKind::Logistic || qs.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::size_t wrong = 0;
    for (const auto& q : qs) {
        const double logit = forward(model, embed(layout, demos, s, q.x))[0];
        wrong += (logit > 0.0) != (q.y[0] > 0.5);
    }
    return static_cast<double>(wrong) / static_cast<double>(qs.size());
}

Json selection_to_json(const SelectionResult& r) {
    Json j;
    j["method"] = r.method;
    j["chosen"] = std::vector<std::size_t>(r.chosen.indices().begin(), r.chosen.indices().end());
    if (r.scores) {
        j["scores"] = r.scores->s;
        j["coverage"] = r.scores->coverage;
        j["alpha"] = r.scores->alpha;
    }
    Json subsets = Json::array();
    for (const auto& e : r.subset_estimates) {
        subsets.push_back({{"subset", std::vector<std::size_t>(e.subset.indices().begin(), e.subset.indices().end())},
                           {"value", e.value},
                           {"provenance", e.provenance == Provenance::Exact ? "exact" : "estimated"},
                           {"anchors", e.anchor_ids},
                           {"relative_distance", e.relative_distance}});
    }
    j["subset_estimates"] = std::move(subsets);
    j["anchor_subsets"] = r.anchor_subsets;
    if (!r.candidates.empty()) j["candidates"] = r.candidates;
    Json trace = Json::array();
    for (const auto& s : r.trace) {
        trace.push_back({{"size", s.size},
                         {"chosen", s.chosen},
                         {"value", s.value},
                         {"estimated", s.estimated},
                         {"anchor_demo", s.anchor_demo ? Json(*s.anchor_demo) : Json(nullptr)}});
    }
    j["trace"] = std::move(trace);
    j["ledger"] = {{"forward", r.ledger.forward},
                   {"backward", r.ledger.backward},
                   {"vector_ops", r.ledger.vector_ops},
                   {"forward_equivalents", r.ledger.forward_equivalents()}};
    return j;
}

}  // namespace

const std::vector<std::string>& known_methods() {
    static const std::vector<std::string> names{"ge-re",     "ge-fs",     "ge-ce", "oracle-re",
                                                "oracle-fs", "oracle-ce", "top-k", "random-k"};
    return names;
}

SelectionResult run_method(const std::string& name, const SelectionProblem& p, const SelectionConfig& cfg) {
    if (name == "ge-re") return select_random_ensemble(p, cfg);
    if (name == "ge-fs") return select_forward(p, cfg);
    if (name == "ge-ce") return select_cross_entropy(p, cfg);
    if (name == "oracle-re") return oracle_random_ensemble(p, cfg);
    if (name == "oracle-fs") return oracle_forward_selection(p, cfg);
    if (name == "oracle-ce") return oracle_cross_entropy(p, cfg);
    if (name == "top-k") return select_topk(p.layout, p.demos, p.queries, cfg.k);
    if (name == "random-k") return select_random(p.demos.size(), cfg.k, cfg.seed);
    throw ValidationError("unknown method '" + name + "'");
}

// ---------------------------------------------------------------------------
// Commands

void cmd_gen_task(const ExperimentConfig& cfg) {
    const Writer out(cfg);
    const LabeledDataset data = generate_task(cfg.task);
    const auto report = validate_dataset(data.data);
    if (!report.empty()) throw std::runtime_error("generated dataset failed validation: " + report.front().message);
    out.json("dataset.json", dataset_to_json(data.data));
    out.json("labels.json", labels_to_json(data));
}

void cmd_train_model(const ExperimentConfig& cfg) {
    const Writer out(cfg);
    const EmbeddingLayout layout(cfg.train_k_max, cfg.task.d_in, 1);
    Rng rng = Rng(cfg.seed).fork("model-init");
    CsvTable trace({"step", "loss"});
    ModelBundle bundle{AffineModel(Matrix::Zero(1, 1), Vector::Zero(1)), layout};
    if (cfg.model_kind == "linear_attention") {
        const LinearTaskSampler sampler(cfg.task.d_in, cfg.train_k_min, cfg.train_k_max, cfg.train_noise_std);
        auto result = train_icl_model(cfg.training, sampler);
        for (const auto& [step, value] : result.loss_trace) trace.add_row({fmt(step), fmt(value)});
        bundle.model = std::move(result.model);
    } else if (cfg.model_kind == "affine") {
        const auto d = layout.d_emb();
        bundle.model = AffineModel(rng.normal_matrix(1, d, 1.0 / std::sqrt(static_cast<double>(d))), rng.normal_vector(1));
    } else if (cfg.model_kind == "relu2") {
        bundle.model = TwoLayerReLU::random(layout.d_emb(), cfg.relu_hidden, 1, rng, 1.0, 0.1);
    } else {
        throw ValidationError("model_kind must be linear_attention, affine or relu2");
    }
    out.json("model.json", model_to_json(bundle));
    out.csv("training_trace.csv", std::move(trace));
}

void cmd_estimate(const ExperimentConfig& cfg) {
    const Writer out(cfg);
    const Loaded in = load_inputs(cfg);
    const auto& data = in.data;
    const std::size_t n = data.demos.size();
    auto demos = std::make_shared<const DemoSet>(data.demos);

    CsvTable rss({"k", "n_subsets", "n_anchors", "rss", "relative_rss", "spearman", "mean_exact", "mean_estimated",
                  "anchor_forward_equivalents", "estimate_model_calls", "exact_forward_equivalents"});
    CsvTable buckets({"k", "bucket", "count", "mean_relative_squared_error", "std_relative_squared_error"});
    CsvTable rows({"k", "subset", "exact", "estimated", "relative_squared_error", "relative_distance",
                   "abs_error_over_embedding_norm"});

    for (std::size_t k : cfg.sweep()) {
        if (k > in.bundle.layout.k_max) throw ValidationError("k exceeds the model's prompt capacity");
        const SelectionConfig sel = cfg.selection(n, k);
        std::vector<PromptSubset> subsets;
        std::vector<PromptSubset> anchors;
        if (cfg.subset_mode == "random") {
            subsets = sample_subsets(n, sel.m, k, sel.seed);
            Rng rng = Rng(sel.seed).fork("anchors");
            for (std::size_t a : rng.sample_without_replacement(subsets.size(), sel.alpha)) anchors.push_back(subsets[a]);
        } else if (cfg.subset_mode == "local") {
            Rng rng = Rng(sel.seed).fork("local-anchor");
            anchors.emplace_back(rng.sample_without_replacement(n, k), n);
            const std::size_t swaps = cfg.max_swaps ? cfg.max_swaps : std::max<std::size_t>(1, k / 2);
            subsets = sample_local_subsets(n, anchors.front(), sel.m, swaps, sel.seed);
        } else {
            throw ValidationError("subset_mode must be 'random' or 'local'");
        }

        FlopLedger anchor_ledger, estimate_ledger, exact_ledger;
        auto proj = std::make_shared<const Projection>(sel.identity_projection
                                                           ? Projection::identity(in.bundle.layout.d_emb())
                                                           : build_projection(in.bundle.layout.d_emb(), sel.d_proj, sel.seed));
        std::vector<AnchorCache> caches;
        for (std::size_t a = 0; a < anchors.size(); ++a) {
            caches.push_back(precompute_anchor(in.bundle.model, in.bundle.layout, demos, data.queries, anchors[a], proj,
                                               data.loss, &anchor_ledger, a));
        }
        const auto est = multi_anchor_estimate(caches, data.loss, subsets, &estimate_ledger);
        double mean_norm = 0.0;
        for (const auto& e : caches.front().entries()) mean_norm += e.anchor_norm;
        mean_norm /= static_cast<double>(caches.front().n_queries());

        std::vector<double> exact(subsets.size()), estimated(subsets.size());
        std::vector<ApproxErrorRecord> records;
        double sum_sq = 0.0;
        for (std::size_t j = 0; j < subsets.size(); ++j) {
            exact[j] = exact_loss(in.bundle.model, in.bundle.layout, data.demos, data.queries, subsets[j], data.loss,
                                  &exact_ledger)
                           .value;
            estimated[j] = est[j].value;
            sum_sq += exact[j] * exact[j];
            records.push_back({j, exact[j], estimated[j], est[j].relative_distance});
            rows.add_row({fmt(k), fmt(j), fmt(exact[j]), fmt(estimated[j]), fmt(records.back().relative_squared_error()),
                          fmt(est[j].relative_distance), fmt(std::abs(exact[j] - estimated[j]) / mean_norm)});
        }
        const double r = rss_scores(estimated, exact);
        const double mean_exact = std::accumulate(exact.begin(), exact.end(), 0.0) / static_cast<double>(exact.size());
        const double mean_est =
            std::accumulate(estimated.begin(), estimated.end(), 0.0) / static_cast<double>(estimated.size());
        rss.add_row({fmt(k), fmt(subsets.size()), fmt(anchors.size()), fmt(r), fmt(sum_sq > 0 ? r / sum_sq : 0.0),
                     fmt(subsets.size() > 1 ? spearman_correlation(estimated, exact) : 0.0), fmt(mean_exact),
                     fmt(mean_est), fmt(static_cast<std::size_t>(anchor_ledger.snapshot().forward_equivalents())),
                     fmt(static_cast<std::size_t>(estimate_ledger.snapshot().model_calls())),
                     fmt(static_cast<std::size_t>(exact_ledger.snapshot().forward_equivalents()))});

        const auto table = aggregate_relative_error(records);
        for (const auto& b : table.buckets) {
            buckets.add_row({fmt(k), fmt(b.lower) + "-" + fmt(b.upper), fmt(b.count), fmt(b.mean), fmt(b.stddev)});
        }
        buckets.add_row({fmt(k), "all", fmt(table.overall.count), fmt(table.overall.mean), fmt(table.overall.stddev)});
        buckets.add_row({fmt(k), "outside", fmt(table.outside_buckets), "", ""});
        buckets.add_row({fmt(k), "excluded_zero_exact", fmt(table.excluded_zero_exact), "", ""});
    }
    out.csv("estimate_rss.csv", std::move(rss));
    out.csv("estimate_error.csv", std::move(buckets));
    out.csv("estimate_subsets.csv", std::move(rows));
}

void cmd_select(const ExperimentConfig& cfg) {
    const Writer out(cfg);
    const Loaded in = load_inputs(cfg);
    if (cfg.methods.size() != 1) throw ValidationError("select runs exactly one method (--method)");
    const SelectionConfig sel = cfg.selection(in.data.demos.size());
    const SelectionProblem p{in.bundle.model, in.bundle.layout, in.data.demos, in.data.queries, in.data.loss};
    const auto r = run_method(cfg.methods.front(), p, sel);
    Json j = selection_to_json(r);
    j["config"] = cfg.to_json();
    out.json("selection.json", std::move(j));
}

void cmd_evaluate(const ExperimentConfig& cfg) {
    const Writer out(cfg);
    const Loaded in = load_inputs(cfg);
    const auto& data = in.data;
    CsvTable table({"method", "k", "train_loss", "test_loss", "train_error_rate", "test_error_rate",
                    "forward_equivalents", "in_distribution_fraction"});
    CsvTable flops({"method", "k", "forward_equivalents", "train_loss"});
    CsvTable by_k({"method", "k", "train_loss", "test_loss"});
    for (std::size_t k : cfg.sweep()) {
        const SelectionConfig sel = cfg.selection(data.demos.size(), k);
        const SelectionProblem p{in.bundle.model, in.bundle.layout, data.demos, data.queries, data.loss};
        for (const auto& method : cfg.methods) {
            const auto r = run_method(method, p, sel);
            const double train = exact_loss(p.model, p.layout, data.demos, data.queries, r.chosen, data.loss).value;
            const double test = data.test.empty()
                                    ? std::numeric_limits<double>::quiet_NaN()
                                    : exact_loss(p.model, p.layout, data.demos, data.test, r.chosen, data.loss).value;
            const auto fe = static_cast<std::size_t>(r.ledger.forward_equivalents());
            table.add_row({method, fmt(k), fmt(train), fmt(test),
                           fmt(error_rate(p.model, p.layout, data.demos, r.chosen, data.queries, data.loss)),
                           fmt(error_rate(p.model, p.layout, data.demos, r.chosen, data.test, data.loss)), fmt(fe),
                           fmt(in_distribution_fraction(r.chosen, in.demo_component))});
            flops.add_row({method, fmt(k), fmt(fe), fmt(train)});
            by_k.add_row({method, fmt(k), fmt(train), fmt(test)});
        }
    }
    out.csv("evaluate.csv", std::move(table));
    out.csv("loss_vs_flops.csv", std::move(flops));
    out.csv("loss_vs_k.csv", std::move(by_k));
}

namespace {

// Forward-equivalents implied by each selector's loop structure.
std::uint64_t predicted_cost(const std::string& method, const SelectionConfig& s, std::size_t n, std::size_t n_train) {
    const std::uint64_t T = n_train;
    if (method == "ge-re") return 3 * s.alpha * T;
    if (method == "oracle-re") return s.m * T;
    if (method == "ge-ce") return 3 * T;
    if (method == "oracle-ce") return s.k_prefilter * T;
    if (method == "ge-fs" || method == "oracle-fs") {
        std::uint64_t total = 0;
        for (std::size_t size = 1; size <= s.k; ++size) {
            const bool est = method == "ge-fs" && size >= s.t_start;
            total += est ? 3 * T : (n - size + 1) * T;
        }
        return total;
    }
    return 0;
}

}  // namespace

void cmd_bench_flops(const ExperimentConfig& cfg) {
    const Writer out(cfg);
    const Loaded in = load_inputs(cfg);
    const auto& data = in.data;
    CsvTable table({"method", "baseline", "k", "method_forward", "method_backward", "method_forward_equivalents",
                    "baseline_forward_equivalents", "speedup", "predicted_method", "predicted_baseline"});
    const SelectionProblem p{in.bundle.model, in.bundle.layout, data.demos, data.queries, data.loss};
    for (std::size_t k : cfg.sweep()) {
        const SelectionConfig sel = cfg.selection(data.demos.size(), k);
        for (const auto& method : cfg.methods) {
            if (method.rfind("ge-", 0) != 0) continue;
            const std::string baseline = "oracle-" + method.substr(3);
            const auto a = run_method(method, p, sel);
            const auto b = run_method(baseline, p, sel);
            table.add_row({method, baseline, fmt(k), fmt(static_cast<std::size_t>(a.ledger.forward)),
                           fmt(static_cast<std::size_t>(a.ledger.backward)),
                           fmt(static_cast<std::size_t>(a.ledger.forward_equivalents())),
                           fmt(static_cast<std::size_t>(b.ledger.forward_equivalents())), fmt(speedup(b.ledger, a.ledger)),
                           fmt(static_cast<std::size_t>(predicted_cost(method, sel, data.demos.size(), data.queries.size()))),
                           fmt(static_cast<std::size_t>(
                               predicted_cost(baseline, sel, data.demos.size(), data.queries.size())))});
        }
    }
    out.csv("bench_flops.csv", std::move(table));
}

void cmd_hessian(const ExperimentConfig& cfg) {
    const Writer out(cfg);
    const Loaded in = load_inputs(cfg);
    const auto& data = in.data;
    if (data.test.empty()) throw ValidationError("hessian needs a dataset with test queries");
    const SelectionProblem p{in.bundle.model, in.bundle.layout, data.demos, data.queries, data.loss};
    CsvTable table({"method", "k", "train_loss", "test_loss", "train_hessian_trace", "train_trace_stderr",
                    "test_hessian_trace", "test_trace_stderr"});
    for (std::size_t k : cfg.sweep()) {
        const SelectionConfig sel = cfg.selection(data.demos.size(), k);
        std::vector<NamedSelection> chosen;
        for (const auto& method : cfg.methods) chosen.push_back({method, run_method(method, p, sel).chosen});
        for (const auto& row : sharpness_report(p.model, p.layout, data.demos, chosen, data.queries, data.test, data.loss,
                                                cfg.hessian)) {
            table.add_row({row.method, fmt(k), fmt(row.train_loss), fmt(row.test_loss), fmt(row.train_trace.trace),
                           fmt(row.train_trace.standard_error), fmt(row.test_trace.trace),
                           fmt(row.test_trace.standard_error)});
        }
    }
    out.csv("hessian.csv", std::move(table));
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"gen-task", "train-model", "estimate", "select",
                                                "evaluate", "bench-flops", "hessian"};
    return names;
}

void run_command(const std::string& name, const ExperimentConfig& cfg) {
    if (name == "gen-task") return cmd_gen_task(cfg);
    if (name == "train-model") return cmd_train_model(cfg);
    if (name == "estimate") return cmd_estimate(cfg);
    if (name == "select") return cmd_select(cfg);
    if (name == "evaluate") return cmd_evaluate(cfg);
    if (name == "bench-flops") return cmd_bench_flops(cfg);
    if (name == "hessian") return cmd_hessian(cfg);
    throw ValidationError("unknown command '" + name + "'");
}

}  // namespace iclsel

// SPDX-License-Identifier: Apache-2.0

#include "iclsel/tasks.hpp"

#include "iclsel/rng.hpp"

#include <numeric>

namespace iclsel {

void TaskSpec::validate() const {
    auto fail = [](const std::string& msg) { throw ValidationError("task spec: " + msg); };
    if (d_in < 1) fail("d_in must be >= 1");
    if (n_components < 1) fail("need at least one component");
    if (n_components > 1 && n_components >= d_in) fail("mixtures need fewer components than input dimensions");
    if (n_demo < 1 || n_train < 1 || n_test < 1) fail("example counts must be >= 1");
    if (noise == NoiseKind::Gaussian && !(noise_std >= 0.0)) fail("noise_std must be >= 0");
    if (!component_counts.empty()) {
        if (component_counts.size() != n_components) fail("component_counts must list every component");
        if (std::accumulate(component_counts.begin(), component_counts.end(), std::size_t{0}) != n_demo) {
            fail("component_counts must sum to n_demo");
        }
    }
    if (family == TaskFamily::Relu && relu_hidden < 1) fail("ReLU teacher needs a hidden layer");
}

TaskSpec TaskSpec::mixture(std::uint64_t seed) {
    TaskSpec s;
    s.n_components = 3;
    s.n_demo = 3000;
    s.n_train = 100;
    s.n_test = 100;
    s.seed = seed;
    return s;
}

std::vector<bool> LabeledDataset::in_distribution() const {
    std::vector<bool> out(demo_component.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = demo_component[i] == 0;
    return out;
}

namespace {

std::vector<std::size_t> assign_components(const TaskSpec& spec, Rng rng) {
    std::vector<std::size_t> counts = spec.component_counts;
    if (counts.empty()) {
        counts.assign(spec.n_components, spec.n_demo / spec.n_components);
        for (std::size_t c = 0; c < spec.n_demo % spec.n_components; ++c) ++counts[c];
    }
    std::vector<std::size_t> ids;
    ids.reserve(spec.n_demo);
    for (std::size_t c = 0; c < counts.size(); ++c) ids.insert(ids.end(), counts[c], c);
    rng.shuffle(ids);
    return ids;
}

template <typename Label>
LabeledDataset generate(const TaskSpec& spec, Label&& label) {
    const Rng root(spec.seed);
    LabeledDataset out;
    out.seed = spec.seed;
    out.data.d_in = spec.d_in;
    out.data.d_out = 1;
    out.data.loss = LossKind::SquaredError;
    out.demo_component = assign_components(spec, root.fork("assign"));

    auto make = [&](std::string_view stream, const std::vector<std::size_t>& comps, std::vector<Example>& dst) {
        Rng xs = root.fork(std::string(stream) + "/x");
        Rng noise = root.fork(std::string(stream) + "/noise");
        dst.reserve(comps.size());
        for (std::size_t c : comps) {
            Vector x = xs.normal_vector(spec.d_in);
            Vector y(1);
            y[0] = label(c, x);
            if (spec.noise == NoiseKind::Gaussian) y[0] += spec.noise_std * noise.normal();
            dst.push_back({std::move(x), std::move(y)});
        }
    };
    out.query_component.assign(spec.n_train, 0);
    out.test_component.assign(spec.n_test, 0);
    make("demos", out.demo_component, out.data.demos);
    make("queries", out.query_component, out.data.queries);
    make("test", out.test_component, out.data.test);
    return out;
}

}  // namespace

LabeledDataset gen_linear_family(const TaskSpec& spec) {
    spec.validate();
    Rng rng = Rng(spec.seed).fork("betas");
    std::vector<Vector> betas;
    for (std::size_t c = 0; c < spec.n_components; ++c) betas.push_back(rng.normal_vector(spec.d_in));
    auto out = generate(spec, [&](std::size_t c, const Vector& x) { return betas[c].dot(x); });
    out.betas = std::move(betas);
    return out;
}

LabeledDataset gen_relu_family(const TaskSpec& spec) {
    spec.validate();
    Rng rng = Rng(spec.seed).fork("teachers");
    std::vector<TwoLayerReLU> teachers;
    for (std::size_t c = 0; c < spec.n_components; ++c) {
        Matrix W1 = rng.normal_matrix(spec.relu_hidden, spec.d_in, 1.0 / std::sqrt(static_cast<double>(spec.d_in)));
        Matrix W2 = rng.normal_matrix(1, spec.relu_hidden,
                                      spec.relu_output_scale / std::sqrt(static_cast<double>(spec.relu_hidden)));
        teachers.emplace_back(std::move(W1), Vector::Zero(static_cast<Eigen::Index>(spec.relu_hidden)), std::move(W2),
                              Vector::Constant(1, spec.relu_output_bias));
    }
    auto out = generate(spec, [&](std::size_t c, const Vector& x) { return teachers[c].forward(x)[0]; });
    out.teachers = std::move(teachers);
    return out;
}

LabeledDataset generate_task(const TaskSpec& spec) {
    return spec.family == TaskFamily::Linear ? gen_linear_family(spec) : gen_relu_family(spec);
}

LabeledDataset duplicate_demos(const LabeledDataset& dataset, std::size_t copies) {
    if (copies < 1) throw ValidationError("duplicate_demos: copies must be >= 1");
    LabeledDataset out = dataset;
    out.data.demos.clear();
    out.demo_component.clear();
    for (std::size_t i = 0; i < dataset.data.demos.size(); ++i) {
        for (std::size_t r = 0; r < copies; ++r) {
            out.data.demos.push_back(dataset.data.demos[i]);
            out.demo_component.push_back(dataset.demo_component[i]);
        }
    }
    return out;
}

}  // namespace iclsel

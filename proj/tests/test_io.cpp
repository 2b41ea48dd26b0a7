// SPDX-License-Identifier: Apache-2.0

#include "helpers.hpp"
#include "iclsel/io.hpp"
#include "iclsel/training.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace iclsel;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("iclsel_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("dataset round trip") {
    TaskSpec spec = TaskSpec::mixture(5);
    spec.n_demo = 40;
    const auto d = gen_linear_family(spec).data;
    const Json j = dataset_to_json(d);
    CHECK(j["format"] == 1);
    CHECK(j["loss"] == "squared");
    const Dataset back = dataset_from_json(Json::parse(j.dump()));
    REQUIRE(back.demos.size() == 40);
    CHECK(back.demos[7].x == d.demos[7].x);
    CHECK(back.queries[3].y == d.queries[3].y);
    CHECK(back.test.size() == d.test.size());
}

TEST_CASE("malformed and invalid datasets are rejected") {
    CHECK_THROWS_AS(dataset_from_json(Json::parse(R"({"format": 2})")), FormatError);
    CHECK_THROWS_AS(dataset_from_json(Json::parse(R"({"format": 1, "d_in": 1})")), FormatError);
    const auto bad_label = Json::parse(
        R"({"format": 1, "d_in": 1, "d_out": 1, "loss": "logistic",
            "demos": [[[0.5], [0.5]]], "queries": [[[1.0], [1.0]]]})");
    CHECK_THROWS_AS(dataset_from_json(bad_label), ValidationError);
    const auto bad_dims = Json::parse(
        R"({"format": 1, "d_in": 2, "d_out": 1, "loss": "squared",
            "demos": [[[0.5], [0.5]]], "queries": [[[1.0], [1.0]]]})");
    CHECK_THROWS_AS(dataset_from_json(bad_dims), ValidationError);
}

TEST_CASE("model files round trip bit for bit") {
    Rng rng(3);
    const EmbeddingLayout layout(4, 2, 1);
    const Vector e = rng.normal_vector(layout.d_emb());
    const TrainingConfig cfg{.steps = 0, .n_layers = 2};
    const ModelBundle bundles[] = {
        {AffineModel(rng.normal_matrix(1, layout.d_emb()), rng.normal_vector(1)), layout},
        {TwoLayerReLU::random(layout.d_emb(), 5, 1, rng, 1.0, 0.5), layout},
        {train_icl_model(cfg, LinearTaskSampler(2, 2, 4)).model, layout}};
    for (const auto& b : bundles) {
        const Json j = model_to_json(b);
        CHECK(j["format"] == "model.v1");
        const auto back = model_from_json(Json::parse(j.dump()));
        CHECK(back.layout == layout);
        CHECK(model_kind(back.model) == model_kind(b.model));
        CHECK(forward(back.model, e) == forward(b.model, e));
    }
    Json broken = model_to_json(bundles[0]);
    broken["arrays"]["W"]["shape"] = {2, 2};
    CHECK_THROWS_AS(model_from_json(broken), FormatError);
    broken = model_to_json(bundles[0]);
    broken["model_kind"] = "transformer";
    CHECK_THROWS_AS(model_from_json(broken), FormatError);
}

TEST_CASE("matrices serialize row-major") {
    Matrix m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    const Json j = matrix_to_json(m);
    CHECK(j["data"] == Json::parse("[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]"));
    CHECK(matrix_from_json(j) == m);
}

TEST_CASE("label sidecar") {
    auto spec = TaskSpec::mixture(2);
    spec.n_demo = 30;
    const auto d = gen_linear_family(spec);
    const Json j = labels_to_json(d);
    CHECK(j["seed"] == 2);
    CHECK(j["demo_component"].size() == 30);
    const Matrix g = matrix_from_json(j["beta_inner_products"]);
    CHECK(g(0, 1) == doctest::Approx(d.betas[0].dot(d.betas[1])));
}

TEST_CASE("csv rendering") {
    CsvTable t({"a", "b"});
    t.add_row({"1", "x"});
    t.add_comment("seed", "4");
    CHECK(t.render() == "# schema=1\n# seed=4\na,b\n1,x\n");
    CHECK_THROWS(t.add_row({"1"}));
}

TEST_CASE("doubles format to the shortest round-trip form") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(2.0) == "2");
    const double v = 1.0 / 3.0;
    CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("atomic writes") {
    const auto dir = scratch("atomic");
    write_file_atomic(dir / "out.txt", "hello\n");
    std::ifstream in(dir / "out.txt");
    std::string line;
    std::getline(in, line);
    CHECK(line == "hello");
    CHECK_FALSE(fs::exists(dir / "out.txt.tmp"));
    CHECK_THROWS_AS(write_file_atomic(dir / "missing" / "out.txt", "x"), ValidationError);
    CHECK(config_digest(Json{{"a", 1}}) == config_digest(Json{{"a", 1}}));
    CHECK(config_digest(Json{{"a", 1}}) != config_digest(Json{{"a", 2}}));
}

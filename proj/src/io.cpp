// SPDX-License-Identifier: Apache-2.0

#include "iclsel/io.hpp"

#include "iclsel/rng.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace iclsel {

namespace fs = std::filesystem;

namespace {

Json vector_to_json(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Vector vector_from_json(const Json& j, const char* what) {
    if (!j.is_array()) throw FormatError(std::string(what) + ": expected an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw FormatError(std::string(what) + ": non-numeric entry");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Json examples_to_json(const std::vector<Example>& items) {
    Json a = Json::array();
    for (const auto& e : items) a.push_back(Json::array({vector_to_json(e.x), vector_to_json(e.y)}));
    return a;
}

std::vector<Example> examples_from_json(const Json& j, const char* what) {
    if (!j.is_array()) throw FormatError(std::string(what) + ": expected a list of [x, y] pairs");
    std::vector<Example> out;
    out.reserve(j.size());
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2) throw FormatError(std::string(what) + ": expected [x, y]");
        out.push_back({vector_from_json(pair[0], what), vector_from_json(pair[1], what)});
    }
    return out;
}

template <typename T>
T field(const Json& j, const char* key) {
    if (!j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw FormatError(std::string("field '") + key + "' has the wrong type");
    }
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
    Json data = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    return Json{{"shape", {m.rows(), m.cols()}}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const Json& j) {
    const auto shape = field<std::vector<std::size_t>>(j, "shape");
    if (shape.size() != 2) throw FormatError("array shape must have two entries");
    const Vector flat = vector_from_json(j.at("data"), "array data");
    if (static_cast<std::size_t>(flat.size()) != shape[0] * shape[1]) throw FormatError("array data does not match its shape");
    Matrix m(static_cast<Eigen::Index>(shape[0]), static_cast<Eigen::Index>(shape[1]));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = flat[r * m.cols() + c];
    return m;
}

Json dataset_to_json(const Dataset& data) {
    Json j;
    j["format"] = 1;
    j["d_in"] = data.d_in;
    j["d_out"] = data.d_out;
    j["loss"] = std::string(to_string(data.loss));
    j["demos"] = examples_to_json(data.demos);
    j["queries"] = examples_to_json(data.queries);
    if (!data.test.empty()) j["test"] = examples_to_json(data.test);
    return j;
}

Dataset dataset_from_json(const Json& j) {
    if (!j.is_object()) throw FormatError("dataset: expected an object");
    if (field<int>(j, "format") != 1) throw FormatError("dataset: unsupported format version");
    Dataset d;
    d.d_in = field<std::size_t>(j, "d_in");
    d.d_out = field<std::size_t>(j, "d_out");
    d.loss = loss_kind_from_string(field<std::string>(j, "loss"));
    d.demos = examples_from_json(j.at("demos"), "demos");
    d.queries = examples_from_json(j.at("queries"), "queries");
    if (j.contains("test")) d.test = examples_from_json(j.at("test"), "test");
    const auto report = validate_dataset(d);
    if (!report.empty()) {
        throw ValidationError("dataset: " + report.front().where + ": " + report.front().message +
                              (report.size() > 1 ? " (+" + std::to_string(report.size() - 1) + " more)" : ""));
    }
    return d;
}

Json model_to_json(const ModelBundle& bundle) {
    Json j;
    j["format"] = "model.v1";
    j["model_kind"] = std::string(model_kind(bundle.model));
    j["dims"] = {{"k_max", bundle.layout.k_max}, {"d_in", bundle.layout.d_in}, {"d_out", bundle.layout.d_out},
                 {"d_emb", bundle.layout.d_emb()}};
    Json arrays;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AffineModel>) {
                arrays["W"] = matrix_to_json(m.W);
                arrays["b"] = matrix_to_json(m.b);
            } else if constexpr (std::is_same_v<T, TwoLayerReLU>) {
                arrays["W1"] = matrix_to_json(m.W1);
                arrays["b1"] = matrix_to_json(m.b1);
                arrays["W2"] = matrix_to_json(m.W2);
                arrays["b2"] = matrix_to_json(m.b2);
            } else {
                j["dims"]["layers"] = m.n_layers();
                j["trained"] = m.trained();
                for (std::size_t l = 0; l < m.n_layers(); ++l) {
                    arrays["value." + std::to_string(l)] = matrix_to_json(m.layers()[l].value);
                    arrays["key_query." + std::to_string(l)] = matrix_to_json(m.layers()[l].key_query);
                }
                arrays["readout"] = matrix_to_json(m.readout());
            }
        },
        bundle.model);
    j["arrays"] = std::move(arrays);
    return j;
}

ModelBundle model_from_json(const Json& j) {
    if (!j.is_object() || field<std::string>(j, "format") != "model.v1") throw FormatError("model: expected format model.v1");
    const Json& dims = j.at("dims");
    const EmbeddingLayout layout(field<std::size_t>(dims, "k_max"), field<std::size_t>(dims, "d_in"),
                                 field<std::size_t>(dims, "d_out"));
    const Json& arrays = j.at("arrays");
    auto arr = [&](const std::string& name) {
        if (!arrays.contains(name)) throw FormatError("model: missing array '" + name + "'");
        return matrix_from_json(arrays.at(name));
    };
    auto vec = [&](const std::string& name) -> Vector {
        Matrix m = arr(name);
        if (m.cols() != 1) throw FormatError("model: '" + name + "' must be a column");
        return m.col(0);
    };
    const auto kind = field<std::string>(j, "model_kind");
    if (kind == "affine") return {AffineModel(arr("W"), vec("b")), layout};
    if (kind == "relu2") return {TwoLayerReLU(arr("W1"), vec("b1"), arr("W2"), vec("b2")), layout};
    if (kind == "linear_attention") {
        const auto n_layers = field<std::size_t>(dims, "layers");
        std::vector<AttentionLayer> layers;
        for (std::size_t l = 0; l < n_layers; ++l) {
            layers.push_back({arr("value." + std::to_string(l)), arr("key_query." + std::to_string(l))});
        }
        return {LinearAttentionICL(layout.d_in, layout.d_out, std::move(layers), arr("readout"),
                                   j.value("trained", false)),
                layout};
    }
    throw FormatError("model: unknown model_kind '" + kind + "'");
}

Json labels_to_json(const LabeledDataset& data) {
    Json j;
    j["format"] = 1;
    j["seed"] = data.seed;
    j["demo_component"] = data.demo_component;
    j["query_component"] = data.query_component;
    j["test_component"] = data.test_component;
    if (!data.betas.empty()) {
        Matrix gram(static_cast<Eigen::Index>(data.betas.size()), static_cast<Eigen::Index>(data.betas.size()));
        for (std::size_t a = 0; a < data.betas.size(); ++a)
            for (std::size_t b = 0; b < data.betas.size(); ++b)
                gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = data.betas[a].dot(data.betas[b]);
        j["beta_inner_products"] = matrix_to_json(gram);
    }
    return j;
}

std::string config_digest(const Json& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size()) throw std::logic_error("csv row width does not match the header");
    rows_.push_back(std::move(cells));
}

void CsvTable::add_comment(const std::string& key, const std::string& value) { comments_.emplace_back(key, value); }

std::string CsvTable::render() const {
    std::ostringstream out;
    out << "# schema=1\n";
    for (const auto& [k, v] : comments_) out << "# " << k << "=" << v << "\n";
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << "\n";
    };
    line(columns_);
    for (const auto& r : rows_) line(r);
    return out.str();
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
    if (!fs::is_directory(parent)) throw ValidationError("output directory " + parent.string() + " does not exist");
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) {
            out.close();
            fs::remove(tmp);
            throw std::runtime_error("short write to " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

}  // namespace iclsel

// SPDX-License-Identifier: Apache-2.0
//
// File formats: datasets (format 1), model weights (model.v1), component-label
// sidecars and schema-tagged CSV tables. Every write goes to a temporary file
// that is renamed into place.

#pragma once

#include "iclsel/core.hpp"
#include "iclsel/embedding.hpp"
#include "iclsel/models.hpp"
#include "iclsel/tasks.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace iclsel {

using Json = nlohmann::ordered_json;

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Json dataset_to_json(const Dataset& data);
/// Throws FormatError on malformed input and ValidationError when the data fails validate_dataset.
Dataset dataset_from_json(const Json& j);

/// A model together with the prompt layout it consumes.
struct ModelBundle {
    Model model;
    EmbeddingLayout layout;
};

Json model_to_json(const ModelBundle& bundle);
ModelBundle model_from_json(const Json& j);

/// Component ids plus the realized inner products between generating vectors.
Json labels_to_json(const LabeledDataset& data);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

/// Lowercase hex of fnv1a64 over the compact dump of `config`.
std::string config_digest(const Json& config);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns);

    void add_row(std::vector<std::string> cells);
    /// Adds a `# key=value` line after the schema line.
    void add_comment(const std::string& key, const std::string& value);
    std::string render() const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::pair<std::string, std::string>> comments_;
};

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

Json read_json_file(const std::filesystem::path& path);
/// Writes via `<path>.tmp` and rename. The parent directory must exist.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace iclsel

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rbias/data/dataset.hpp"
#include "rbias/metrics.hpp"
#include "rbias/models/classifier.hpp"
#include "rbias/models/training.hpp"

namespace rbias {

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);

// Column roles and class mapping of a dataset file.
struct DatasetManifest {
  ColumnSchema schema;
  std::vector<std::string> class_names;
  bool standardized = false;
  std::optional<std::uint64_t> seed;  // set for generated datasets
  std::string generator;              // empty for user-supplied data
};

nlohmann::json to_json(const DatasetManifest& manifest);
DatasetManifest dataset_manifest_from_json(const nlohmann::json& j);

// Everything needed to reload a trained model. Parameters are stored as JSON
// numbers, which round-trip doubles bit-exactly.
struct ModelFile {
  Classifier model;
  Architecture architecture;
  std::optional<Standardization> standardization;
  nlohmann::json train_config = nlohmann::json::object();
  nlohmann::json dataset = nlohmann::json::object();  // DatasetManifest
  std::string dataset_hash;
  std::string manifest_id;
};

nlohmann::json to_json(const ModelFile& file);
ModelFile model_file_from_json(const nlohmann::json& j);
ModelFile load_model_file(const std::filesystem::path& path);

nlohmann::json train_config_to_json(const TrainConfig& config);

// Canonical JSON text: sorted keys, two-space indent, trailing newline.
std::string dump_json(const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

// Columns: partition,tau,value,method.
struct MethodCurves {
  std::string method;
  std::vector<RobustnessCurve> curves;
};
std::string curves_to_csv(std::span<const MethodCurves> curves, const std::string& manifest_id = "");

std::string loss_trace_to_csv(std::span<const double> trace, const std::string& manifest_id = "");

}  // namespace rbias

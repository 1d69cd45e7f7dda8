#include "rbias/io/files.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <memory>

#include "rbias/error.hpp"
#include "rbias/io/csv.hpp"

namespace rbias {

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
  return v;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw DataError("ragged weight matrix in model file");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(2 * length);
  char buffer[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buffer, sizeof(buffer), "%02x", digest[i]);
    hex += buffer;
  }
  return hex;
}

nlohmann::json to_json(const DatasetManifest& manifest) {
  nlohmann::json j;
  j["columns"] = {{"label", manifest.schema.label},
                  {"features", manifest.schema.features},
                  {"attributes", manifest.schema.attributes}};
  j["class_names"] = manifest.class_names;
  j["standardized"] = manifest.standardized;
  j["seed"] = manifest.seed ? nlohmann::json(*manifest.seed) : nlohmann::json(nullptr);
  j["generator"] = manifest.generator;
  return j;
}

DatasetManifest dataset_manifest_from_json(const nlohmann::json& j) {
  try {
    DatasetManifest m;
    const auto& columns = j.at("columns");
    m.schema.label = columns.at("label").get<std::string>();
    m.schema.features = columns.value("features", std::vector<std::string>{});
    m.schema.attributes = columns.value("attributes", std::vector<std::string>{});
    m.class_names = j.value("class_names", std::vector<std::string>{});
    m.standardized = j.value("standardized", false);
    if (j.contains("seed") && !j.at("seed").is_null()) m.seed = j.at("seed").get<std::uint64_t>();
    m.generator = j.value("generator", std::string{});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid dataset manifest: ") + e.what());
  }
}

nlohmann::json train_config_to_json(const TrainConfig& config) {
  nlohmann::json j;
  j["epochs"] = config.epochs;
  j["batch_size"] = config.batch_size;
  j["learning_rate"] = config.learning_rate;
  j["seed"] = config.seed;
  j["objective"] = to_string(config.objective);
  j["alpha"] = config.alpha;
  j["tau"] = config.tau;
  j["temperature"] = config.temperature;
  j["protected_partition"] =
      config.protected_partition ? nlohmann::json(config.protected_partition->name) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const ModelFile& file) {
  nlohmann::json j;
  j["format"] = "rbias-model";
  j["version"] = 1;
  j["architecture"] = {{"kind", file.model.is_affine() ? "affine" : "mlp"},
                       {"spec", file.architecture.to_string()},
                       {"layer_sizes", file.model.layer_sizes()}};
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer& layer : file.model.layers()) {
    layers.push_back({{"weights", matrix_to_json(layer.weights)}, {"biases", vector_to_json(layer.biases)}});
  }
  j["layers"] = std::move(layers);
  if (file.standardization) {
    j["standardization"] = {{"mean", vector_to_json(file.standardization->mean)},
                            {"scale", vector_to_json(file.standardization->scale)}};
  } else {
    j["standardization"] = nullptr;
  }
  j["train_config"] = file.train_config;
  j["dataset"] = file.dataset;
  j["dataset_hash"] = file.dataset_hash;
  j["manifest_id"] = file.manifest_id;
  return j;
}

ModelFile model_file_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string{}) != "rbias-model") throw DataError("not an rbias model file");
    ModelFile file;
    std::vector<Layer> layers;
    for (const auto& layer : j.at("layers")) {
      layers.push_back(Layer{matrix_from_json(layer.at("weights")), vector_from_json(layer.at("biases"))});
    }
    file.model = Classifier(std::move(layers));
    file.architecture = Architecture::parse(j.at("architecture").at("spec").get<std::string>());
    if (!j.at("standardization").is_null()) {
      Standardization s;
      s.mean = vector_from_json(j.at("standardization").at("mean"));
      s.scale = vector_from_json(j.at("standardization").at("scale"));
      if (s.mean.size() != file.model.input_dim() || s.scale.size() != file.model.input_dim()) {
        throw DataError("standardization does not match the model input width");
      }
      file.standardization = std::move(s);
    }
    file.train_config = j.value("train_config", nlohmann::json::object());
    file.dataset = j.value("dataset", nlohmann::json::object());
    file.dataset_hash = j.value("dataset_hash", std::string{});
    file.manifest_id = j.value("manifest_id", std::string{});
    return file;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid model file: ") + e.what());
  }
}

ModelFile load_model_file(const std::filesystem::path& path) {
  return model_file_from_json(read_json(path));
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json read_json(const std::filesystem::path& path) {
  const std::string text = csv::read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string curves_to_csv(std::span<const MethodCurves> curves, const std::string& manifest_id) {
  std::string out;
  if (!manifest_id.empty()) out += "# manifest=" + manifest_id + "\n";
  out += "partition,tau,value,method\n";
  for (const MethodCurves& m : curves) {
    for (const RobustnessCurve& c : m.curves) {
      for (std::size_t i = 0; i < c.grid.size(); ++i) {
        out += csv::join({c.partition, csv::format_double(c.grid[i]), csv::format_double(c.values[i]), m.method});
        out += "\n";
      }
    }
  }
  return out;
}

std::string loss_trace_to_csv(std::span<const double> trace, const std::string& manifest_id) {
  std::string out;
  if (!manifest_id.empty()) out += "# manifest=" + manifest_id + "\n";
  out += "epoch,loss\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out += std::to_string(i) + "," + csv::format_double(trace[i]) + "\n";
  }
  return out;
}

}  // namespace rbias

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rbias/diffcore/tensor.hpp"

namespace rbias {

// A categorical column: dense codes plus the display string for each code.
struct CategoricalColumn {
  std::vector<int> codes;
  std::vector<std::string> names;
};

// Features, class labels and optional sensitive attributes for N examples.
struct Dataset {
  Matrix features;  // N x d
  std::vector<std::string> feature_names;
  std::vector<int> labels;  // N entries in [0, k)
  std::vector<std::string> class_names;
  std::map<std::string, CategoricalColumn> attributes;

  std::size_t size() const { return labels.size(); }
  Eigen::Index dim() const { return features.cols(); }
  int num_classes() const { return static_cast<int>(class_names.size()); }

  // Throws DataError when an invariant (N >= 1, d >= 1, k >= 2, label range,
  // attribute lengths) is violated.
  void validate() const;
};

// Which CSV columns play which role. An empty feature list means every column
// that is neither the label nor an attribute.
struct ColumnSchema {
  std::string label;
  std::vector<std::string> features;
  std::vector<std::string> attributes;
};

Dataset load_csv(const std::filesystem::path& path, const ColumnSchema& schema);
Dataset parse_csv(const std::string& text, const ColumnSchema& schema);

// Writes features at 17 significant digits so the text re-parses bit-exactly.
void write_csv(const Dataset& dataset, const std::filesystem::path& path);
std::string to_csv(const Dataset& dataset);

ColumnSchema schema_of(const Dataset& dataset, const std::string& label_column = "label");

// Per-feature affine rescaling x -> (x - mean) / scale.
struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  Matrix apply(const Matrix& features) const;
};

// Zero-variance columns keep scale 1.
Standardization fit_standardization(const Matrix& features);

// Seeded uniform split; the first returned set holds round(fraction * N) rows.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed);

Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& rows);

}  // namespace rbias

#include "rbias/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "rbias/error.hpp"
#include "rbias/io/csv.hpp"

namespace rbias {

namespace {

// Dense codes in first-appearance order.
CategoricalColumn encode(const std::vector<std::string>& values) {
  CategoricalColumn column;
  std::unordered_map<std::string, int> index;
  column.codes.reserve(values.size());
  for (const auto& v : values) {
    auto [it, inserted] = index.try_emplace(v, static_cast<int>(column.names.size()));
    if (inserted) column.names.push_back(v);
    column.codes.push_back(it->second);
  }
  return column;
}

std::size_t column_index(const csv::Row& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw MissingColumn(name);
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

void Dataset::validate() const {
  const std::size_t n = labels.size();
  if (n == 0) throw DataError("dataset has no rows");
  if (features.cols() < 1) throw DataError("dataset has no feature columns");
  if (static_cast<std::size_t>(features.rows()) != n) {
    throw DataError("feature rows do not match label count");
  }
  if (class_names.size() < 2) throw DataError("dataset needs at least two classes");
  if (!feature_names.empty() &&
      feature_names.size() != static_cast<std::size_t>(features.cols())) {
    throw DataError("feature name count does not match feature columns");
  }
  for (int label : labels) {
    if (label < 0 || label >= num_classes()) throw DataError("label out of range");
  }
  for (const auto& [name, column] : attributes) {
    if (column.codes.size() != n) throw DataError("attribute '" + name + "' has wrong length");
    for (int code : column.codes) {
      if (code < 0 || static_cast<std::size_t>(code) >= column.names.size()) {
        throw DataError("attribute '" + name + "' has an out-of-range code");
      }
    }
  }
}

Dataset load_csv(const std::filesystem::path& path, const ColumnSchema& schema) {
  return parse_csv(csv::read_file(path), schema);
}

Dataset parse_csv(const std::string& text, const ColumnSchema& schema) {
  const std::vector<csv::Row> rows = csv::parse(text);
  if (rows.empty()) throw EmptyFile("CSV has no header");
  if (rows.size() == 1) throw EmptyFile("CSV has a header but no data rows");
  const csv::Row& header = rows.front();

  const std::size_t label_col = column_index(header, schema.label);
  std::vector<std::size_t> attribute_cols;
  for (const auto& name : schema.attributes) attribute_cols.push_back(column_index(header, name));

  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names;
  if (schema.features.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == label_col) continue;
      if (std::find(attribute_cols.begin(), attribute_cols.end(), c) != attribute_cols.end()) {
        continue;
      }
      feature_cols.push_back(c);
      feature_names.push_back(header[c]);
    }
  } else {
    for (const auto& name : schema.features) {
      feature_cols.push_back(column_index(header, name));
      feature_names.push_back(name);
    }
  }
  if (feature_cols.empty()) throw MissingColumn("<feature>");

  const std::size_t n = rows.size() - 1;
  Dataset data;
  data.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(feature_cols.size()));
  data.feature_names = std::move(feature_names);
  std::vector<std::string> labels(n);
  std::vector<std::vector<std::string>> attributes(attribute_cols.size(), std::vector<std::string>(n));

  for (std::size_t r = 0; r < n; ++r) {
    const csv::Row& row = rows[r + 1];
    if (row.size() != header.size()) {
      throw DataError("row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                      " fields, header has " + std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      double value = 0.0;
      const std::string& cell = row[feature_cols[j]];
      if (!csv::parse_double(cell, value) || !std::isfinite(value)) {
        throw NonNumericFeature(r + 1, feature_cols[j], cell);
      }
      data.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = value;
    }
    labels[r] = row[label_col];
    for (std::size_t a = 0; a < attribute_cols.size(); ++a) attributes[a][r] = row[attribute_cols[a]];
  }

  CategoricalColumn label_column = encode(labels);
  data.labels = std::move(label_column.codes);
  data.class_names = std::move(label_column.names);
  for (std::size_t a = 0; a < attribute_cols.size(); ++a) {
    data.attributes.emplace(schema.attributes[a], encode(attributes[a]));
  }
  if (data.class_names.size() < 2) {
    throw DataError("label column '" + schema.label + "' has fewer than two classes");
  }
  data.validate();
  return data;
}

std::string to_csv(const Dataset& dataset) {
  std::string out;
  csv::Row header;
  for (Eigen::Index j = 0; j < dataset.dim(); ++j) {
    header.push_back(dataset.feature_names.empty() ? "x" + std::to_string(j)
                                                   : dataset.feature_names[static_cast<std::size_t>(j)]);
  }
  header.push_back("label");
  for (const auto& [name, column] : dataset.attributes) header.push_back(name);
  out += csv::join(header) + "\n";

  for (std::size_t i = 0; i < dataset.size(); ++i) {
    csv::Row row;
    for (Eigen::Index j = 0; j < dataset.dim(); ++j) {
      row.push_back(csv::format_double(dataset.features(static_cast<Eigen::Index>(i), j)));
    }
    row.push_back(dataset.class_names[static_cast<std::size_t>(dataset.labels[i])]);
    for (const auto& [name, column] : dataset.attributes) {
      row.push_back(column.names[static_cast<std::size_t>(column.codes[i])]);
    }
    out += csv::join(row) + "\n";
  }
  return out;
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
  csv::write_file(path, to_csv(dataset));
}

ColumnSchema schema_of(const Dataset& dataset, const std::string& label_column) {
  ColumnSchema schema;
  schema.label = label_column;
  for (Eigen::Index j = 0; j < dataset.dim(); ++j) {
    schema.features.push_back(dataset.feature_names.empty()
                                  ? "x" + std::to_string(j)
                                  : dataset.feature_names[static_cast<std::size_t>(j)]);
  }
  for (const auto& [name, column] : dataset.attributes) schema.attributes.push_back(name);
  return schema;
}

Matrix Standardization::apply(const Matrix& features) const {
  Matrix out = features;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    out.col(j) = (out.col(j).array() - mean(j)) / scale(j);
  }
  return out;
}

Standardization fit_standardization(const Matrix& features) {
  Standardization s;
  const auto n = static_cast<double>(features.rows());
  s.mean = features.colwise().mean().transpose();
  s.scale.resize(features.cols());
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    const double var = (features.col(j).array() - s.mean(j)).square().sum() / n;
    s.scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), dataset.dim());
  out.feature_names = dataset.feature_names;
  out.class_names = dataset.class_names;
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) =
        dataset.features.row(static_cast<Eigen::Index>(rows[i]));
    out.labels.push_back(dataset.labels.at(rows[i]));
  }
  for (const auto& [name, column] : dataset.attributes) {
    CategoricalColumn c;
    c.names = column.names;
    for (std::size_t r : rows) c.codes.push_back(column.codes.at(r));
    out.attributes.emplace(name, std::move(c));
  }
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(order.size())));
  std::vector<std::size_t> first(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  std::vector<std::size_t> second(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {subset(dataset, first), subset(dataset, second)};
}

}  // namespace rbias

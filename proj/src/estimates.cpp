#include "rbias/estimates.hpp"

#include <algorithm>

#include "rbias/error.hpp"
#include "rbias/geometry.hpp"
#include "rbias/io/csv.hpp"

namespace rbias {

namespace {

int parse_int(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const int value = std::stoi(text, &used);
    if (used == text.size()) return value;
  } catch (const std::exception&) {
  }
  throw DataError(std::string("invalid ") + what + ": '" + text + "'");
}

}  // namespace

std::string to_string(BoundKind bound) {
  switch (bound) {
    case BoundKind::kExact: return "exact";
    case BoundKind::kUpper: return "upper";
    case BoundKind::kLower: return "lower";
  }
  return "?";
}

BoundKind bound_kind_of(const std::string& method) {
  if (method == "exact") return BoundKind::kExact;
  if (method == "deepfool" || method == "cw") return BoundKind::kUpper;
  if (method == "smoothing") return BoundKind::kLower;
  throw DataError("unknown estimation method '" + method + "'");
}

std::vector<DistanceEstimate> exact_distances(const AffineClassifier& model,
                                              const Dataset& dataset) {
  if (dataset.size() == 0) throw DataError("dataset is empty");
  std::vector<DistanceEstimate> out;
  out.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const ExactDistance d =
        exact_distance(model, dataset.features.row(static_cast<Eigen::Index>(i)).transpose());
    DistanceEstimate e;
    e.example_index = i;
    e.true_label = dataset.labels[i];
    e.predicted_label = d.predicted;
    e.method = "exact";
    e.bound = BoundKind::kExact;
    e.distance = d.value;
    e.success = true;
    out.push_back(std::move(e));
  }
  return out;
}

std::string distances_to_csv(std::span<const DistanceEstimate> estimates,
                             const std::string& manifest_id) {
  std::string out;
  if (!manifest_id.empty()) out += "# manifest=" + manifest_id + "\n";
  out += "example_index,true_label,predicted_label,method,distance,success,iterations\n";
  for (const DistanceEstimate& e : estimates) {
    out += csv::join({std::to_string(e.example_index), std::to_string(e.true_label),
                      std::to_string(e.predicted_label), e.method, csv::format_double(e.distance),
                      e.success ? "true" : "false", std::to_string(e.iterations)});
    out += "\n";
  }
  return out;
}

std::vector<DistanceEstimate> parse_distances_csv(const std::string& text) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw EmptyFile("distances file is empty");
  const csv::Row expected{"example_index", "true_label", "predicted_label", "method",
                          "distance",      "success",    "iterations"};
  if (rows.front() != expected) throw DataError("distances file has an unexpected header");
  std::vector<DistanceEstimate> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    if (row.size() != expected.size()) throw DataError("distances row " + std::to_string(r) + " is malformed");
    DistanceEstimate e;
    e.example_index = static_cast<std::size_t>(parse_int(row[0], "example_index"));
    e.true_label = parse_int(row[1], "true_label");
    e.predicted_label = parse_int(row[2], "predicted_label");
    e.method = row[3];
    e.bound = bound_kind_of(e.method);
    if (!csv::parse_double(row[4], e.distance) || e.distance < 0.0) {
      throw DataError("invalid distance '" + row[4] + "' in row " + std::to_string(r));
    }
    e.success = row[5] == "true";
    e.iterations = parse_int(row[6], "iterations");
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace rbias

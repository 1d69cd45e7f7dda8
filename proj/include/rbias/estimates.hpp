#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rbias/data/dataset.hpp"
#include "rbias/models/classifier.hpp"

namespace rbias {

enum class BoundKind { kExact, kUpper, kLower };

std::string to_string(BoundKind bound);
BoundKind bound_kind_of(const std::string& method);

// One per-example distance estimate. Failed attacks carry +inf. `correct`
// refers to the predictor that produced the estimate (the smoothed classifier
// for randomized smoothing).
struct DistanceEstimate {
  std::size_t example_index = 0;
  int true_label = 0;
  int predicted_label = 0;
  std::string method;
  BoundKind bound = BoundKind::kExact;
  double distance = 0.0;
  bool success = true;
  int iterations = 0;
  std::string error;  // non-empty when this example could not be estimated

  bool correct() const { return true_label == predicted_label; }
};

// Closed-form distances for an affine classifier.
std::vector<DistanceEstimate> exact_distances(const AffineClassifier& model,
                                              const Dataset& dataset);

// Columns: example_index,true_label,predicted_label,method,distance,success,iterations.
// Distances use 17 significant digits, failed attacks "inf". A leading
// "# manifest=<id>" comment line is written when manifest_id is non-empty.
std::string distances_to_csv(std::span<const DistanceEstimate> estimates,
                             const std::string& manifest_id = "");
std::vector<DistanceEstimate> parse_distances_csv(const std::string& text);

}  // namespace rbias

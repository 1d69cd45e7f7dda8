#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rbias/data/dataset.hpp"
#include "rbias/data/partition.hpp"
#include "rbias/models/classifier.hpp"

namespace rbias {

// "affine" or "mlp:<w1>,<w2>,..." (hidden widths).
struct Architecture {
  std::vector<int> hidden;

  static Architecture parse(const std::string& text);
  std::string to_string() const;
  std::vector<int> layer_sizes(int input_dim, int num_classes) const;
};

enum class Objective { kErm, kAdvErm };

std::string to_string(Objective objective);
Objective parse_objective(const std::string& text);

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  Objective objective = Objective::kErm;
  double alpha = 0.0;        // regularizer weight
  double tau = 0.0;          // distance threshold inside the regularizer
  double temperature = 0.1;  // sigmoid relaxation of 1{d > tau}, input units
  std::optional<Partition> protected_partition;

  // Throws ConfigError; AdvERM needs alpha > 0 and a protected partition.
  void validate() const;
};

struct TrainResult {
  Classifier model;
  std::vector<double> loss_trace;  // mean objective per epoch
};

// Mini-batch SGD on the selected objective. Deterministic given the seed.
// Throws NumericalError on a non-finite loss.
TrainResult train(const Dataset& dataset, const Architecture& arch, const TrainConfig& config);
TrainResult train(const Dataset& dataset, Classifier initial, const TrainConfig& config);

struct Batch {
  Matrix features;
  std::vector<int> labels;
  std::vector<bool> in_partition;
};

Batch make_batch(const Dataset& dataset, std::span<const std::size_t> rows,
                 const std::vector<bool>& partition_mask);

// Cross-entropy plus alpha times the relaxed robustness-bias gap
//   | mean_{correct, out} s_i - mean_{correct, in} s_i |,
//   s_i = sigmoid((d_i - tau) / T),  d_i = |m_i| / ||grad_x m_i||,
// where m_i is the top-two logit margin. The regularizer is skipped when
// either side of the partition has no correctly classified row in the batch.
struct AdvermTerms {
  double loss = 0.0;
  double cross_entropy = 0.0;
  double regularizer = 0.0;
  bool regularized = false;
  std::vector<double> distances;       // d_i per row
  std::vector<double> gradient_norms;  // ||grad_x m_i|| per row
};

struct AdvermGradient {
  AdvermTerms terms;
  std::vector<Layer> gradient;  // same shapes as the model's layers
};

// `frozen_gradient_norms`, when non-empty, replaces ||grad_x m_i|| by the
// given constants. The gradient always treats those norms as constants.
AdvermTerms adverm_loss(const Classifier& model, const Batch& batch, const TrainConfig& config,
                        std::span<const double> frozen_gradient_norms = {});
AdvermGradient adverm_gradient(const Classifier& model, const Batch& batch,
                               const TrainConfig& config);

double accuracy(const Classifier& model, const Dataset& dataset);

}  // namespace rbias

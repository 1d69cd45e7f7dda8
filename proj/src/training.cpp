#include "rbias/models/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "rbias/error.hpp"

namespace rbias {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Holds one recorded graph so repeated evaluations only rebind leaves.
class ObjectiveEvaluator {
 public:
  explicit ObjectiveEvaluator(const Classifier& model)
      : program_(build_graph(model, /*with_loss=*/true)) {}

  AdvermGradient run(const Classifier& model, const Batch& batch, const TrainConfig& config,
                     std::span<const double> frozen_norms, bool want_gradient) {
    const auto rows = static_cast<Eigen::Index>(batch.labels.size());
    if (rows == 0) throw ConfigError("empty batch");
    if (batch.features.rows() != rows || batch.in_partition.size() != batch.labels.size()) {
      throw ShapeMismatch("batch features, labels and partition mask disagree in length");
    }
    if (!frozen_norms.empty() && static_cast<Eigen::Index>(frozen_norms.size()) != rows) {
      throw ShapeMismatch("frozen gradient norms must have one entry per row");
    }

    Graph& graph = program_.graph;
    program_.bind_parameters(model);
    graph.bind(program_.input, Tensor(batch.features));
    Tensor labels(rows, 1);
    for (Eigen::Index i = 0; i < rows; ++i) labels(i, 0) = batch.labels[static_cast<std::size_t>(i)];
    graph.bind(*program_.labels, std::move(labels));
    graph.forward();

    AdvermGradient out;
    AdvermTerms& terms = out.terms;
    terms.cross_entropy = graph.value(*program_.loss).item();
    terms.loss = terms.cross_entropy;

    const double alpha = config.objective == Objective::kAdvErm ? config.alpha : 0.0;
    const Matrix logits = graph.value(program_.logits).matrix();
    const Eigen::Index k = logits.cols();
    Matrix margin_seed = Matrix::Zero(rows, k);
    std::vector<int> predicted(static_cast<std::size_t>(rows));
    std::vector<int> rival(static_cast<std::size_t>(rows));
    std::vector<double> margin(static_cast<std::size_t>(rows));
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto r = static_cast<std::size_t>(i);
      const Eigen::VectorXd z = logits.row(i).transpose();
      predicted[r] = argmax(z);
      rival[r] = top_rival(z, predicted[r]);
      margin[r] = z(predicted[r]) - z(rival[r]);
      margin_seed(i, predicted[r]) = 1.0;
      margin_seed(i, rival[r]) = -1.0;
    }

    terms.gradient_norms.assign(static_cast<std::size_t>(rows), 0.0);
    if (frozen_norms.empty()) {
      const Graph::Seed seed{program_.logits, Tensor(margin_seed)};
      const Matrix input_grads =
          graph.backward(std::span<const Graph::Seed>(&seed, 1)).of(program_.input).matrix();
      for (Eigen::Index i = 0; i < rows; ++i) {
        terms.gradient_norms[static_cast<std::size_t>(i)] = input_grads.row(i).norm();
      }
    } else {
      std::copy(frozen_norms.begin(), frozen_norms.end(), terms.gradient_norms.begin());
    }

    // A row whose margin gradient vanishes is treated as infinitely far:
    // its relaxed indicator saturates at 1 and contributes no gradient.
    terms.distances.assign(static_cast<std::size_t>(rows), std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < terms.distances.size(); ++r) {
      if (terms.gradient_norms[r] > 0.0) terms.distances[r] = std::abs(margin[r]) / terms.gradient_norms[r];
    }

    std::size_t count_in = 0;
    std::size_t count_out = 0;
    double sum_in = 0.0;
    double sum_out = 0.0;
    std::vector<double> relaxed(terms.distances.size(), 0.0);
    for (std::size_t r = 0; r < relaxed.size(); ++r) {
      if (predicted[r] != batch.labels[r]) continue;
      relaxed[r] = std::isinf(terms.distances[r]) ? 1.0
                                                  : sigmoid((terms.distances[r] - config.tau) / config.temperature);
      if (batch.in_partition[r]) {
        ++count_in;
        sum_in += relaxed[r];
      } else {
        ++count_out;
        sum_out += relaxed[r];
      }
    }

    Matrix regularizer_seed = Matrix::Zero(rows, k);
    if (alpha > 0.0 && count_in > 0 && count_out > 0) {
      const double gap = sum_out / static_cast<double>(count_out) - sum_in / static_cast<double>(count_in);
      terms.regularized = true;
      terms.regularizer = std::abs(gap);
      terms.loss += alpha * terms.regularizer;
      const double sign = gap > 0.0 ? 1.0 : (gap < 0.0 ? -1.0 : 0.0);
      for (std::size_t r = 0; r < relaxed.size(); ++r) {
        if (predicted[r] != batch.labels[r] || std::isinf(terms.distances[r])) continue;
        const double side = batch.in_partition[r] ? -1.0 / static_cast<double>(count_in)
                                                  : 1.0 / static_cast<double>(count_out);
        const double margin_sign = margin[r] > 0.0 ? 1.0 : (margin[r] < 0.0 ? -1.0 : 0.0);
        const double d_relaxed = relaxed[r] * (1.0 - relaxed[r]) / config.temperature;
        const double coefficient =
            alpha * sign * side * d_relaxed * margin_sign / terms.gradient_norms[r];
        const auto i = static_cast<Eigen::Index>(r);
        regularizer_seed(i, predicted[r]) += coefficient;
        regularizer_seed(i, rival[r]) -= coefficient;
      }
    }
    if (!std::isfinite(terms.loss)) throw NumericalError("objective is not finite");

    if (want_gradient) {
      const Graph::Seed seeds[] = {{*program_.loss, Tensor::scalar(1.0)},
                                   {program_.logits, Tensor(regularizer_seed)}};
      const Gradients grads = graph.backward(seeds);
      for (std::size_t l = 0; l < program_.weights.size(); ++l) {
        Layer g;
        g.weights = grads.of(program_.weights[l]).matrix();
        g.biases = grads.of(program_.biases[l]).matrix().row(0).transpose();
        out.gradient.push_back(std::move(g));
      }
    }
    return out;
  }

 private:
  ClassifierGraph program_;
};

}  // namespace

Architecture Architecture::parse(const std::string& text) {
  Architecture arch;
  if (text == "affine" || text == "linear") return arch;
  if (text.rfind("mlp:", 0) != 0) {
    throw ConfigError("architecture must be 'affine' or 'mlp:<w1>,<w2>,...', got '" + text + "'");
  }
  std::stringstream widths(text.substr(4));
  std::string item;
  while (std::getline(widths, item, ',')) {
    int w = 0;
    try {
      std::size_t used = 0;
      w = std::stoi(item, &used);
      if (used != item.size()) w = 0;
    } catch (const std::exception&) {
      w = 0;
    }
    if (w < 1) throw ConfigError("invalid hidden width '" + item + "'");
    arch.hidden.push_back(w);
  }
  if (arch.hidden.empty()) throw ConfigError("mlp architecture needs at least one hidden width");
  return arch;
}

std::string Architecture::to_string() const {
  if (hidden.empty()) return "affine";
  std::string out = "mlp:";
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(hidden[i]);
  }
  return out;
}

std::vector<int> Architecture::layer_sizes(int input_dim, int num_classes) const {
  std::vector<int> sizes{input_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(num_classes);
  return sizes;
}

std::string to_string(Objective objective) {
  return objective == Objective::kErm ? "erm" : "adverm";
}

Objective parse_objective(const std::string& text) {
  if (text == "erm" || text == "ERM") return Objective::kErm;
  if (text == "adverm" || text == "AdvERM") return Objective::kAdvErm;
  throw ConfigError("objective must be 'erm' or 'adverm', got '" + text + "'");
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
  if (tau < 0.0) throw ConfigError("tau must be >= 0");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
  if (objective == Objective::kAdvErm) {
    if (!(alpha > 0.0)) throw ConfigError("adverm requires alpha > 0");
    if (!protected_partition) throw ConfigError("adverm requires a protected partition");
  }
}

Batch make_batch(const Dataset& dataset, std::span<const std::size_t> rows,
                 const std::vector<bool>& partition_mask) {
  Batch batch;
  batch.features.resize(static_cast<Eigen::Index>(rows.size()), dataset.dim());
  batch.labels.reserve(rows.size());
  batch.in_partition.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    batch.features.row(static_cast<Eigen::Index>(i)) =
        dataset.features.row(static_cast<Eigen::Index>(rows[i]));
    batch.labels.push_back(dataset.labels[rows[i]]);
    batch.in_partition.push_back(partition_mask.empty() ? false : partition_mask[rows[i]]);
  }
  return batch;
}

AdvermTerms adverm_loss(const Classifier& model, const Batch& batch, const TrainConfig& config,
                        std::span<const double> frozen_gradient_norms) {
  ObjectiveEvaluator evaluator(model);
  return evaluator.run(model, batch, config, frozen_gradient_norms, false).terms;
}

AdvermGradient adverm_gradient(const Classifier& model, const Batch& batch,
                               const TrainConfig& config) {
  ObjectiveEvaluator evaluator(model);
  return evaluator.run(model, batch, config, {}, true);
}

TrainResult train(const Dataset& dataset, const Architecture& arch, const TrainConfig& config) {
  config.validate();
  dataset.validate();
  const auto sizes = arch.layer_sizes(static_cast<int>(dataset.dim()), dataset.num_classes());
  return train(dataset, initialize_classifier(sizes, config.seed), config);
}

TrainResult train(const Dataset& dataset, Classifier initial, const TrainConfig& config) {
  config.validate();
  dataset.validate();
  if (initial.input_dim() != dataset.dim() || initial.num_classes() != dataset.num_classes()) {
    throw ShapeMismatch("model shape does not match the dataset");
  }
  std::vector<bool> mask;
  if (config.protected_partition) {
    if (config.protected_partition->universe != dataset.size()) {
      throw ConfigError("protected partition does not belong to this dataset");
    }
    mask = config.protected_partition->mask();
  }

  TrainResult result{std::move(initial), {}};
  ObjectiveEvaluator evaluator(result.model);
  std::seed_seq shuffle_seed{config.seed, std::uint64_t{0x5348554646ULL}};
  std::mt19937_64 rng(shuffle_seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double weighted_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t stop = std::min(order.size(), start + batch_size);
      const Batch batch =
          make_batch(dataset, std::span<const std::size_t>(order).subspan(start, stop - start), mask);
      AdvermGradient step = evaluator.run(result.model, batch, config, {}, true);
      weighted_loss += step.terms.loss * static_cast<double>(stop - start);
      auto& layers = result.model.layers();
      for (std::size_t l = 0; l < layers.size(); ++l) {
        layers[l].weights -= config.learning_rate * step.gradient[l].weights;
        layers[l].biases -= config.learning_rate * step.gradient[l].biases;
      }
    }
    const double mean_loss = weighted_loss / static_cast<double>(order.size());
    if (!std::isfinite(mean_loss)) {
      throw NumericalError("loss became non-finite at epoch " + std::to_string(epoch));
    }
    result.loss_trace.push_back(mean_loss);
  }
  return result;
}

double accuracy(const Classifier& model, const Dataset& dataset) {
  const std::vector<int> predicted = model.predict_rows(dataset.features);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == dataset.labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace rbias

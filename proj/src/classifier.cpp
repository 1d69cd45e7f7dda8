#include "rbias/models/classifier.hpp"

#include <cmath>
#include <random>
#include <string>

#include "rbias/error.hpp"

namespace rbias {

Classifier::Classifier(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("classifier needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    if (layer.weights.rows() < 1 || layer.weights.cols() < 1) {
      throw ConfigError("layer " + std::to_string(l) + " has an empty weight matrix");
    }
    if (layer.biases.size() != layer.weights.rows()) {
      throw ShapeMismatch("layer " + std::to_string(l) + " bias length does not match rows");
    }
    if (l > 0 && layer.weights.cols() != layers_[l - 1].weights.rows()) {
      throw ShapeMismatch("layer " + std::to_string(l) + " input width does not chain");
    }
  }
  if (num_classes() < 2) throw ConfigError("classifier needs at least two classes");
}

Classifier::Classifier(const AffineClassifier& affine)
    : Classifier(std::vector<Layer>{Layer{affine.weights, affine.biases}}) {}

std::optional<AffineClassifier> Classifier::as_affine() const {
  if (!is_affine()) return std::nullopt;
  return AffineClassifier{layers_[0].weights, layers_[0].biases};
}

std::vector<int> Classifier::layer_sizes() const {
  std::vector<int> sizes{static_cast<int>(input_dim())};
  for (const Layer& layer : layers_) sizes.push_back(static_cast<int>(layer.weights.rows()));
  return sizes;
}

Eigen::VectorXd Classifier::logits(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != input_dim()) {
    throw ShapeMismatch("input has dimension " + std::to_string(x.size()) + ", model expects " +
                        std::to_string(input_dim()));
  }
  Eigen::VectorXd h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    h = layers_[l].weights * h + layers_[l].biases;
    if (l + 1 < layers_.size()) h = h.cwiseMax(0.0);
  }
  return h;
}

Matrix Classifier::logits_rows(const Matrix& inputs) const {
  if (inputs.cols() != input_dim()) {
    throw ShapeMismatch("inputs have " + std::to_string(inputs.cols()) + " columns, model expects " +
                        std::to_string(input_dim()));
  }
  Matrix h = inputs;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix next = h * layers_[l].weights.transpose();
    next.rowwise() += layers_[l].biases.transpose();
    if (l + 1 < layers_.size()) next = next.cwiseMax(0.0);
    h = std::move(next);
  }
  return h;
}

int Classifier::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return argmax(logits(x));
}

std::vector<int> Classifier::predict_rows(const Matrix& inputs) const {
  const Matrix z = logits_rows(inputs);
  std::vector<int> out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) out[static_cast<std::size_t>(i)] = argmax(z.row(i).transpose());
  return out;
}

int argmax(const Eigen::Ref<const Eigen::VectorXd>& scores) {
  int best = 0;
  for (Eigen::Index j = 1; j < scores.size(); ++j) {
    if (scores(j) > scores(best)) best = static_cast<int>(j);
  }
  return best;
}

int top_rival(const Eigen::Ref<const Eigen::VectorXd>& scores, int excluded) {
  int best = -1;
  for (Eigen::Index j = 0; j < scores.size(); ++j) {
    if (j == excluded) continue;
    if (best < 0 || scores(j) > scores(best)) best = static_cast<int>(j);
  }
  return best;
}

Classifier initialize_classifier(std::span<const int> sizes, std::uint64_t seed) {
  if (sizes.size() < 2) throw ConfigError("architecture needs input and output widths");
  for (int s : sizes) {
    if (s < 1) throw ConfigError("layer widths must be positive");
  }
  std::mt19937_64 rng(seed);
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    Layer layer;
    layer.weights.resize(sizes[l + 1], sizes[l]);
    layer.biases.resize(sizes[l + 1]);
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = uniform(rng);
    }
    for (Eigen::Index r = 0; r < layer.biases.size(); ++r) layer.biases(r) = uniform(rng);
    layers.push_back(std::move(layer));
  }
  return Classifier(std::move(layers));
}

void ClassifierGraph::bind_parameters(const Classifier& model) {
  const auto& layers = model.layers();
  if (layers.size() != weights.size()) throw ShapeMismatch("model depth does not match graph");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    graph.bind(weights[l], Tensor(layers[l].weights));
    graph.bind(biases[l], Tensor(layers[l].biases.transpose()));
  }
}

ClassifierGraph build_graph(const Classifier& model, bool with_loss) {
  ClassifierGraph out;
  out.input = out.graph.leaf("input");
  NodeId h = out.input;
  const std::size_t depth = model.layers().size();
  for (std::size_t l = 0; l < depth; ++l) {
    const NodeId w = out.graph.leaf("weights" + std::to_string(l));
    const NodeId b = out.graph.leaf("biases" + std::to_string(l));
    out.weights.push_back(w);
    out.biases.push_back(b);
    h = out.graph.add_row(out.graph.matmul(h, out.graph.transpose(w)), b);
    if (l + 1 < depth) h = out.graph.relu(h);
  }
  out.logits = h;
  if (with_loss) {
    out.labels = out.graph.leaf("labels");
    out.loss = out.graph.softmax_cross_entropy(out.logits, *out.labels);
  }
  out.bind_parameters(model);
  return out;
}

InputGradients::InputGradients(const Classifier& model)
    : program_(build_graph(model)), num_classes_(model.num_classes()) {}

LogitJacobian InputGradients::jacobian(const Eigen::Ref<const Eigen::VectorXd>& x) {
  // k copies of x; seeding row j with e_j puts grad z_j into input row j.
  const Matrix copies = x.transpose().replicate(num_classes_, 1);
  const Matrix identity = Matrix::Identity(num_classes_, num_classes_);
  const Matrix grads = seeded(copies, identity);
  LogitJacobian out;
  out.logits = program_.graph.value(program_.logits).matrix().row(0).transpose();
  out.jacobian = grads;
  return out;
}

Matrix InputGradients::seeded(const Matrix& inputs, const Matrix& seeds) {
  program_.graph.bind(program_.input, Tensor(inputs));
  program_.graph.forward();
  const Graph::Seed seed{program_.logits, Tensor(seeds)};
  return program_.graph.backward(std::span<const Graph::Seed>(&seed, 1)).of(program_.input).matrix();
}

LinearizedDistance linearized_distance(const Classifier& model,
                                       const Eigen::Ref<const Eigen::VectorXd>& x) {
  InputGradients gradients(model);
  const LogitJacobian lj = gradients.jacobian(x);
  LinearizedDistance out;
  out.predicted = argmax(lj.logits);
  out.rival = top_rival(lj.logits, out.predicted);
  out.margin = lj.logits(out.predicted) - lj.logits(out.rival);
  out.gradient_norm = (lj.jacobian.row(out.predicted) - lj.jacobian.row(out.rival)).norm();
  if (!(out.gradient_norm > 0.0)) {
    throw DegenerateGradient("margin gradient vanishes between classes " +
                             std::to_string(out.predicted) + " and " + std::to_string(out.rival));
  }
  out.value = std::abs(out.margin) / out.gradient_norm;
  return out;
}

}  // namespace rbias

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rbias/diffcore/graph.hpp"
#include "rbias/diffcore/tensor.hpp"

namespace rbias {

// logits(x) = W x + b with W of shape k x d.
struct AffineClassifier {
  Eigen::MatrixXd weights;
  Eigen::VectorXd biases;

  int num_classes() const { return static_cast<int>(weights.rows()); }
  Eigen::Index input_dim() const { return weights.cols(); }
};

// One dense layer, out = W in + b with W of shape out x in.
struct Layer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd biases;
};

// Feed-forward classifier: dense layers with ReLU between them and raw
// logits out of the last layer. A single layer is an affine classifier.
class Classifier {
 public:
  Classifier() = default;
  explicit Classifier(std::vector<Layer> layers);
  explicit Classifier(const AffineClassifier& affine);

  bool is_affine() const { return layers_.size() == 1; }
  std::optional<AffineClassifier> as_affine() const;

  Eigen::Index input_dim() const { return layers_.front().weights.cols(); }
  int num_classes() const { return static_cast<int>(layers_.back().weights.rows()); }
  // Layer widths from input to output, e.g. {d, 16, k}.
  std::vector<int> layer_sizes() const;

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  // Throws ShapeMismatch when x does not have input_dim() entries.
  Eigen::VectorXd logits(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  // One example per row; returns N x k.
  Matrix logits_rows(const Matrix& inputs) const;

  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  std::vector<int> predict_rows(const Matrix& inputs) const;

 private:
  std::vector<Layer> layers_;
};

// Index of the largest entry; ties go to the lowest index.
int argmax(const Eigen::Ref<const Eigen::VectorXd>& scores);
// Largest entry other than `excluded`; ties go to the lowest index.
int top_rival(const Eigen::Ref<const Eigen::VectorXd>& scores, int excluded);

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization for the layer
// widths in `sizes` ({d, hidden..., k}).
Classifier initialize_classifier(std::span<const int> sizes, std::uint64_t seed);

// A classifier recorded into a Graph with its parameters as bound leaves.
// The input leaf takes a batch with one example per row; `labels` and `loss`
// exist only when built with a loss head.
struct ClassifierGraph {
  Graph graph;
  NodeId input;
  NodeId logits;
  std::optional<NodeId> labels;
  std::optional<NodeId> loss;
  std::vector<NodeId> weights;
  std::vector<NodeId> biases;

  void bind_parameters(const Classifier& model);
};

ClassifierGraph build_graph(const Classifier& model, bool with_loss = false);

// Logits and their input Jacobian at a single point, via reverse mode.
struct LogitJacobian {
  Eigen::VectorXd logits;
  Eigen::MatrixXd jacobian;  // k x d, row j = grad_x z_j(x)
};

class InputGradients {
 public:
  explicit InputGradients(const Classifier& model);

  LogitJacobian jacobian(const Eigen::Ref<const Eigen::VectorXd>& x);

  // Per-row gradient of seed_i . logits(x_i) with respect to x_i.
  Matrix seeded(const Matrix& inputs, const Matrix& seeds);

 private:
  ClassifierGraph program_;
  int num_classes_;
};

// Distance under the local linearization of the top-two logit margin
// m(x) = z_yhat(x) - max_{j != yhat} z_j(x):  |m(x)| / ||grad_x m(x)||.
struct LinearizedDistance {
  double value = 0.0;
  double margin = 0.0;
  double gradient_norm = 0.0;
  int predicted = 0;
  int rival = 0;
};

// Throws DegenerateGradient when the margin gradient vanishes.
LinearizedDistance linearized_distance(const Classifier& model,
                                       const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace rbias

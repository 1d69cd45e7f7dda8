#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rbias/diffcore/tensor.hpp"

namespace rbias {

// Handle to a node recorded in a Graph.
struct NodeId {
  std::size_t index = 0;
  friend bool operator==(NodeId, NodeId) = default;
};

enum class Op {
  kLeaf,
  kMatMul,
  kTranspose,
  kAdd,
  kAddRow,
  kRelu,
  kTanh,
  kScale,
  kSoftmax,
  kLogSumExp,
  kSoftmaxCrossEntropy,
  kL2Norm,
};

// Gradient of the seeded objective with respect to every leaf.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(std::vector<Tensor> by_node) : by_node_(std::move(by_node)) {}

  const Tensor& of(NodeId leaf) const { return by_node_.at(leaf.index); }

 private:
  std::vector<Tensor> by_node_;
};

// A reverse-mode differentiable program over Tensors.
//
// Nodes are recorded once and can be re-evaluated for different leaf
// bindings. Recording order is a topological order, so forward evaluates
// nodes front to back and backward visits each node exactly once in reverse.
// A Graph is not thread-safe; give each worker its own instance.
class Graph {
 public:
  struct Seed {
    NodeId node;
    Tensor gradient;
  };

  // Inputs and parameters. Shapes are fixed by the bound value.
  NodeId leaf(std::string name);

  NodeId matmul(NodeId a, NodeId b);
  NodeId transpose(NodeId a);
  NodeId add(NodeId a, NodeId b);
  // Adds a 1 x n row to every row of an m x n operand.
  NodeId add_row(NodeId a, NodeId row);
  NodeId relu(NodeId a);
  NodeId tanh(NodeId a);
  NodeId scale(NodeId a, double factor);
  // Row-wise softmax.
  NodeId softmax(NodeId a);
  // Row-wise log-sum-exp, m x n -> m x 1.
  NodeId log_sum_exp(NodeId a);
  // Mean cross-entropy of row-wise softmax(logits) against integer labels
  // held in an m x 1 leaf. Produces a 1 x 1 scalar. Labels get no gradient.
  NodeId softmax_cross_entropy(NodeId logits, NodeId labels);
  // Frobenius norm, 1 x 1. The subgradient at 0 is 0.
  NodeId l2_norm(NodeId a);

  void bind(NodeId leaf, Tensor value);

  // Evaluates every node with the current bindings and returns the value of
  // the last recorded node.
  const Tensor& forward();
  const Tensor& forward(std::span<const std::pair<NodeId, Tensor>> bindings);

  // Seeds the last recorded node.
  Gradients backward(const Tensor& output_seed);
  // Seeds several nodes at once; the result is the gradient of the sum of
  // the seeded inner products.
  Gradients backward(std::span<const Seed> seeds);

  const Tensor& value(NodeId node) const;
  NodeId output() const;
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Op op = Op::kLeaf;
    std::size_t a = 0;
    std::size_t b = 0;
    double factor = 0.0;
    std::string name;
    bool bound = false;
    Tensor value;
    Tensor grad;
  };

  NodeId record(Op op, NodeId a, NodeId b = {}, double factor = 0.0);
  void check_node(NodeId node) const;
  void evaluate(Node& node);
  void propagate(const Node& node);

  std::vector<Node> nodes_;
  bool evaluated_ = false;
};

}  // namespace rbias

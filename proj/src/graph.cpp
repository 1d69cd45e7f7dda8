#include "rbias/diffcore/graph.hpp"

#include <cmath>
#include <string>

#include "rbias/error.hpp"

namespace rbias {

namespace {

const char* op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kMatMul: return "matmul";
    case Op::kTranspose: return "transpose";
    case Op::kAdd: return "add";
    case Op::kAddRow: return "add_row";
    case Op::kRelu: return "relu";
    case Op::kTanh: return "tanh";
    case Op::kScale: return "scale";
    case Op::kSoftmax: return "softmax";
    case Op::kLogSumExp: return "log_sum_exp";
    case Op::kSoftmaxCrossEntropy: return "softmax_cross_entropy";
    case Op::kL2Norm: return "l2_norm";
  }
  return "?";
}

std::string shape_string(const Tensor& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

[[noreturn]] void shape_error(Op op, const Tensor& a, const Tensor& b) {
  throw ShapeMismatch(std::string(op_name(op)) + ": incompatible shapes " +
                      shape_string(a) + " and " + shape_string(b));
}

Matrix row_softmax(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double peak = a.row(i).maxCoeff();
    out.row(i) = (a.row(i).array() - peak).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

}  // namespace

NodeId Graph::leaf(std::string name) {
  Node node;
  node.op = Op::kLeaf;
  node.name = std::move(name);
  nodes_.push_back(std::move(node));
  evaluated_ = false;
  return NodeId{nodes_.size() - 1};
}

NodeId Graph::record(Op op, NodeId a, NodeId b, double factor) {
  check_node(a);
  check_node(b);
  Node node;
  node.op = op;
  node.a = a.index;
  node.b = b.index;
  node.factor = factor;
  nodes_.push_back(std::move(node));
  evaluated_ = false;
  return NodeId{nodes_.size() - 1};
}

void Graph::check_node(NodeId node) const {
  if (node.index >= nodes_.size()) {
    throw ConfigError("node " + std::to_string(node.index) + " is not part of this graph");
  }
}

NodeId Graph::matmul(NodeId a, NodeId b) { return record(Op::kMatMul, a, b); }
NodeId Graph::transpose(NodeId a) { return record(Op::kTranspose, a); }
NodeId Graph::add(NodeId a, NodeId b) { return record(Op::kAdd, a, b); }
NodeId Graph::add_row(NodeId a, NodeId row) { return record(Op::kAddRow, a, row); }
NodeId Graph::relu(NodeId a) { return record(Op::kRelu, a); }
NodeId Graph::tanh(NodeId a) { return record(Op::kTanh, a); }
NodeId Graph::scale(NodeId a, double factor) { return record(Op::kScale, a, a, factor); }
NodeId Graph::softmax(NodeId a) { return record(Op::kSoftmax, a); }
NodeId Graph::log_sum_exp(NodeId a) { return record(Op::kLogSumExp, a); }
NodeId Graph::softmax_cross_entropy(NodeId logits, NodeId labels) {
  return record(Op::kSoftmaxCrossEntropy, logits, labels);
}
NodeId Graph::l2_norm(NodeId a) { return record(Op::kL2Norm, a); }

void Graph::bind(NodeId leaf, Tensor value) {
  check_node(leaf);
  Node& node = nodes_[leaf.index];
  if (node.op != Op::kLeaf) {
    throw ConfigError("only leaves can be bound");
  }
  node.value = std::move(value);
  node.bound = true;
  evaluated_ = false;
}

const Tensor& Graph::forward(std::span<const std::pair<NodeId, Tensor>> bindings) {
  for (const auto& [node, value] : bindings) bind(node, value);
  return forward();
}

const Tensor& Graph::forward() {
  if (nodes_.empty()) throw ConfigError("forward on an empty graph");
  for (Node& node : nodes_) {
    if (node.op == Op::kLeaf) {
      if (!node.bound) throw ConfigError("leaf '" + node.name + "' is not bound");
      continue;
    }
    evaluate(node);
    if (!node.value.all_finite()) {
      throw NumericalError(std::string("non-finite value produced by ") + op_name(node.op));
    }
  }
  evaluated_ = true;
  return nodes_.back().value;
}

void Graph::evaluate(Node& node) {
  const Tensor& a = nodes_[node.a].value;
  const Tensor& b = nodes_[node.b].value;
  Matrix& out = node.value.matrix();
  switch (node.op) {
    case Op::kLeaf:
      break;
    case Op::kMatMul:
      if (a.cols() != b.rows()) shape_error(node.op, a, b);
      out.noalias() = a.matrix() * b.matrix();
      break;
    case Op::kTranspose:
      out = a.matrix().transpose();
      break;
    case Op::kAdd:
      if (!a.same_shape(b)) shape_error(node.op, a, b);
      out = a.matrix() + b.matrix();
      break;
    case Op::kAddRow:
      if (b.rows() != 1 || b.cols() != a.cols()) shape_error(node.op, a, b);
      out = a.matrix().rowwise() + b.matrix().row(0);
      break;
    case Op::kRelu:
      out = a.matrix().cwiseMax(0.0);
      break;
    case Op::kTanh:
      out = a.matrix().array().tanh().matrix();
      break;
    case Op::kScale:
      out = node.factor * a.matrix();
      break;
    case Op::kSoftmax:
      out = row_softmax(a.matrix());
      break;
    case Op::kLogSumExp: {
      out.resize(a.rows(), 1);
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double peak = a.matrix().row(i).maxCoeff();
        out(i, 0) = peak + std::log((a.matrix().row(i).array() - peak).exp().sum());
      }
      break;
    }
    case Op::kSoftmaxCrossEntropy: {
      if (b.rows() != a.rows() || b.cols() != 1 || a.rows() == 0) shape_error(node.op, a, b);
      double total = 0.0;
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double label = b(i, 0);
        if (label < 0 || label >= static_cast<double>(a.cols()) || label != std::floor(label)) {
          throw ShapeMismatch("softmax_cross_entropy: label out of range at row " +
                              std::to_string(i));
        }
        const double peak = a.matrix().row(i).maxCoeff();
        const double lse =
            peak + std::log((a.matrix().row(i).array() - peak).exp().sum());
        total += lse - a(i, static_cast<Eigen::Index>(label));
      }
      out.resize(1, 1);
      out(0, 0) = total / static_cast<double>(a.rows());
      break;
    }
    case Op::kL2Norm:
      out.resize(1, 1);
      out(0, 0) = a.matrix().norm();
      break;
  }
}

Gradients Graph::backward(const Tensor& output_seed) {
  const Seed seed{output(), output_seed};
  return backward(std::span<const Seed>(&seed, 1));
}

Gradients Graph::backward(std::span<const Seed> seeds) {
  if (!evaluated_) throw ConfigError("backward called before forward");
  for (Node& node : nodes_) {
    node.grad.matrix().setZero(node.value.rows(), node.value.cols());
  }
  for (const Seed& seed : seeds) {
    check_node(seed.node);
    Node& node = nodes_[seed.node.index];
    if (!seed.gradient.same_shape(node.value)) {
      throw ShapeMismatch("seed shape " + shape_string(seed.gradient) +
                          " does not match node shape " + shape_string(node.value));
    }
    node.grad.matrix() += seed.gradient.matrix();
  }
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->op != Op::kLeaf) propagate(*it);
  }
  std::vector<Tensor> by_node(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].op == Op::kLeaf) by_node[i] = nodes_[i].grad;
  }
  return Gradients(std::move(by_node));
}

void Graph::propagate(const Node& node) {
  const Matrix& g = node.grad.matrix();
  const Matrix& a = nodes_[node.a].value.matrix();
  Matrix& da = nodes_[node.a].grad.matrix();
  switch (node.op) {
    case Op::kLeaf:
      break;
    case Op::kMatMul: {
      const Matrix& b = nodes_[node.b].value.matrix();
      da.noalias() += g * b.transpose();
      nodes_[node.b].grad.matrix().noalias() += a.transpose() * g;
      break;
    }
    case Op::kTranspose:
      da += g.transpose();
      break;
    case Op::kAdd:
      da += g;
      nodes_[node.b].grad.matrix() += g;
      break;
    case Op::kAddRow:
      da += g;
      nodes_[node.b].grad.matrix() += g.colwise().sum();
      break;
    case Op::kRelu:
      da.array() += g.array() * (a.array() > 0.0).cast<double>();
      break;
    case Op::kTanh: {
      const Matrix& t = node.value.matrix();
      da.array() += g.array() * (1.0 - t.array().square());
      break;
    }
    case Op::kScale:
      da += node.factor * g;
      break;
    case Op::kSoftmax: {
      const Matrix& s = node.value.matrix();
      for (Eigen::Index i = 0; i < s.rows(); ++i) {
        const double dot = g.row(i).dot(s.row(i));
        da.row(i).array() += s.row(i).array() * (g.row(i).array() - dot);
      }
      break;
    }
    case Op::kLogSumExp: {
      const Matrix s = row_softmax(a);
      for (Eigen::Index i = 0; i < s.rows(); ++i) da.row(i) += g(i, 0) * s.row(i);
      break;
    }
    case Op::kSoftmaxCrossEntropy: {
      const Matrix& labels = nodes_[node.b].value.matrix();
      Matrix delta = row_softmax(a);
      for (Eigen::Index i = 0; i < delta.rows(); ++i) {
        delta(i, static_cast<Eigen::Index>(labels(i, 0))) -= 1.0;
      }
      da += (g(0, 0) / static_cast<double>(a.rows())) * delta;
      break;
    }
    case Op::kL2Norm: {
      const double norm = node.value(0, 0);
      if (norm > 0.0) da += (g(0, 0) / norm) * a;
      break;
    }
  }
}

const Tensor& Graph::value(NodeId node) const {
  check_node(node);
  return nodes_[node.index].value;
}

NodeId Graph::output() const {
  if (nodes_.empty()) throw ConfigError("graph has no nodes");
  return NodeId{nodes_.size() - 1};
}

}  // namespace rbias

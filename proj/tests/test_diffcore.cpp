#include <gtest/gtest.h>

#include <random>

#include "oracles/oracles.hpp"
#include "rbias/diffcore/graph.hpp"
#include "rbias/error.hpp"
#include "rbias/models/classifier.hpp"

using rbias::Graph;
using rbias::Matrix;
using rbias::NodeId;
using rbias::Tensor;

namespace {

Tensor filled(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return Tensor(m);
}

// Checks d(sum of output .* weights)/d(leaf) against central differences.
void expect_matches_fd(Graph& g, NodeId leaf, const Tensor& weights, double tol = 1e-4) {
  g.forward();
  const Tensor analytic = g.backward(weights).of(leaf);
  const Matrix start = g.value(leaf).matrix();
  const auto objective = [&](const Eigen::VectorXd& flat) {
    Matrix m = start;
    std::copy(flat.data(), flat.data() + flat.size(), m.data());
    g.bind(leaf, Tensor(m));
    return g.forward().matrix().cwiseProduct(weights.matrix()).sum();
  };
  const Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(start.data(), start.size());
  const Eigen::VectorXd numeric = oracle::finite_difference(objective, x0);
  g.bind(leaf, Tensor(start));
  const Eigen::VectorXd got = Eigen::Map<const Eigen::VectorXd>(analytic.matrix().data(), analytic.size());
  EXPECT_LT(oracle::relative_error(got, numeric), tol);
}

}  // namespace

TEST(Graph, AffineEvaluation) {
  Graph g;
  const NodeId w = g.leaf("w");
  const NodeId x = g.leaf("x");
  const NodeId b = g.leaf("b");
  g.add(g.matmul(w, g.transpose(x)), b);
  g.bind(w, Tensor::row({1, 0}));
  g.bind(x, Tensor::row({2, 0}));
  g.bind(b, Tensor::scalar(0));
  EXPECT_DOUBLE_EQ(g.forward().item(), 2.0);
}

TEST(Graph, ReluAndSoftmaxValues) {
  Graph g;
  const NodeId a = g.leaf("a");
  const NodeId r = g.relu(a);
  const NodeId s = g.softmax(a);
  g.bind(a, Tensor::row({-1, 3}));
  g.forward();
  EXPECT_EQ(g.value(r).matrix(), Tensor::row({0, 3}).matrix());

  g.bind(a, Tensor::row({0, 0, 0}));
  g.forward();
  for (double v : g.value(s).data()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Graph, LinearGradient) {
  Graph g;
  const NodeId w = g.leaf("w");
  const NodeId x = g.leaf("x");
  g.matmul(w, g.transpose(x));
  g.bind(w, Tensor::row({3, -1}));
  g.bind(x, Tensor::row({0.5, 7}));
  g.forward();
  const Tensor dx = g.backward(Tensor::scalar(1)).of(x);
  EXPECT_EQ(dx.matrix(), Tensor::row({3, -1}).matrix());
}

TEST(Graph, CrossEntropyGradientAtZeroLogits) {
  Graph g;
  const NodeId z = g.leaf("z");
  const NodeId y = g.leaf("y");
  g.softmax_cross_entropy(z, y);
  g.bind(z, Tensor::row({0, 0}));
  g.bind(y, Tensor::scalar(0));
  EXPECT_NEAR(g.forward().item(), std::log(2.0), 1e-15);
  const Tensor dz = g.backward(Tensor::scalar(1)).of(z);
  EXPECT_NEAR(dz.data()[0], -0.5, 1e-15);
  EXPECT_NEAR(dz.data()[1], 0.5, 1e-15);
}

TEST(Graph, EveryOpMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  const auto unary = [&](auto build) {
    Graph g;
    const NodeId a = g.leaf("a");
    build(g, a);
    g.bind(a, filled(3, 4, rng));
    g.forward();
    const Tensor w = filled(g.value(g.output()).rows(), g.value(g.output()).cols(), rng);
    expect_matches_fd(g, a, w);
  };
  unary([](Graph& g, NodeId a) { g.tanh(a); });
  unary([](Graph& g, NodeId a) { g.relu(a); });
  unary([](Graph& g, NodeId a) { g.scale(a, -2.5); });
  unary([](Graph& g, NodeId a) { g.softmax(a); });
  unary([](Graph& g, NodeId a) { g.log_sum_exp(a); });
  unary([](Graph& g, NodeId a) { g.l2_norm(a); });
  unary([](Graph& g, NodeId a) { g.transpose(a); });

  Graph g;
  const NodeId a = g.leaf("a");
  const NodeId b = g.leaf("b");
  const NodeId r = g.leaf("r");
  g.add_row(g.add(g.matmul(a, b), g.matmul(a, b)), r);
  g.bind(a, filled(3, 4, rng));
  g.bind(b, filled(4, 2, rng));
  g.bind(r, filled(1, 2, rng));
  const Tensor w = filled(3, 2, rng);
  expect_matches_fd(g, a, w);
  expect_matches_fd(g, b, w);
  expect_matches_fd(g, r, w);
}

TEST(Graph, RandomMlpLossGradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::vector<int> sizes = {3, 5, 4, 3};
    const rbias::Classifier model = rbias::initialize_classifier(sizes, seed);
    rbias::ClassifierGraph program = rbias::build_graph(model, true);
    program.bind_parameters(model);
    std::mt19937_64 rng(seed + 100);
    program.graph.bind(program.input, filled(6, 3, rng));
    Matrix labels(6, 1);
    labels << 0, 1, 2, 2, 1, 0;
    program.graph.bind(*program.labels, Tensor(labels));
    for (std::size_t l = 0; l < program.weights.size(); ++l) {
      expect_matches_fd(program.graph, program.weights[l], Tensor::scalar(1));
      expect_matches_fd(program.graph, program.biases[l], Tensor::scalar(1));
    }
    expect_matches_fd(program.graph, program.input, Tensor::scalar(1));
  }
}

TEST(Graph, MultiSeedBackwardSumsContributions) {
  Graph g;
  const NodeId a = g.leaf("a");
  const NodeId t = g.tanh(a);
  g.scale(t, 3.0);
  g.bind(a, Tensor::row({0.3, -0.2}));
  g.forward();
  const std::vector<Graph::Seed> seeds = {{g.output(), Tensor::row({1, 1})}, {t, Tensor::row({1, 0})}};
  const Tensor both = g.backward(seeds).of(a);
  const double d0 = 1.0 - std::tanh(0.3) * std::tanh(0.3);
  const double d1 = 1.0 - std::tanh(-0.2) * std::tanh(-0.2);
  EXPECT_NEAR(both.data()[0], 4.0 * d0, 1e-14);
  EXPECT_NEAR(both.data()[1], 3.0 * d1, 1e-14);
}

TEST(Graph, ErrorContracts) {
  Graph g;
  const NodeId a = g.leaf("a");
  const NodeId b = g.leaf("b");
  g.matmul(a, b);
  g.bind(a, Tensor::row({1, 2}));
  EXPECT_THROW(g.forward(), rbias::ConfigError);  // b unbound
  g.bind(b, Tensor::row({1, 2}));
  EXPECT_THROW(g.forward(), rbias::ShapeMismatch);

  Graph h;
  const NodeId c = h.leaf("c");
  h.relu(c);
  h.bind(c, Tensor::row({1}));
  EXPECT_THROW(h.backward(Tensor::scalar(1)), rbias::ConfigError);
  h.bind(c, Tensor::row({std::numeric_limits<double>::quiet_NaN()}));
  EXPECT_THROW(h.forward(), rbias::NumericalError);
}

#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "oracles/oracles.hpp"
#include "rbias/data/partition.hpp"
#include "rbias/data/synthetic.hpp"
#include "rbias/error.hpp"
#include "rbias/geometry.hpp"
#include "rbias/models/classifier.hpp"
#include "rbias/models/training.hpp"

using namespace rbias;

namespace {

AffineClassifier identity_model() {
  AffineClassifier m;
  m.weights = Eigen::MatrixXd::Identity(2, 2);
  m.biases = Eigen::VectorXd::Zero(2);
  return m;
}

// Flattens all parameters in layer order (weights row-major, then biases).
Eigen::VectorXd flatten(const std::vector<Layer>& layers) {
  std::vector<double> flat;
  for (const Layer& l : layers) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) flat.push_back(l.weights(r, c));
    }
    for (Eigen::Index i = 0; i < l.biases.size(); ++i) flat.push_back(l.biases(i));
  }
  return Eigen::Map<Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

Classifier unflatten(const Classifier& shape, const Eigen::VectorXd& flat) {
  std::vector<Layer> layers = shape.layers();
  Eigen::Index p = 0;
  for (Layer& l : layers) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = flat(p++);
    }
    for (Eigen::Index i = 0; i < l.biases.size(); ++i) l.biases(i) = flat(p++);
  }
  return Classifier(std::move(layers));
}

Dataset separable_blobs() {
  return make_three_class_gaussians(30, triangle_means(3.0), 0.3, 5);
}

}  // namespace

TEST(Classifier, AffineLogitsAndTieBreak) {
  const Classifier m(identity_model());
  const Eigen::VectorXd z = m.logits(Eigen::Vector2d(2, 1));
  EXPECT_EQ(z, Eigen::Vector2d(2, 1));
  EXPECT_EQ(m.predict(Eigen::Vector2d(2, 1)), 0);

  AffineClassifier zero;
  zero.weights = Eigen::MatrixXd::Zero(3, 2);
  zero.biases = Eigen::VectorXd::Zero(3);
  EXPECT_EQ(Classifier(zero).predict(Eigen::Vector2d(4, -7)), 0);
  EXPECT_EQ(top_rival(Eigen::Vector3d(1, 1, 1), 0), 1);
  EXPECT_THROW(m.logits(Eigen::Vector3d(1, 2, 3)), ShapeMismatch);
}

TEST(Classifier, TwoLayerHandComputation) {
  Layer hidden{Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)};
  Layer out{(Eigen::MatrixXd(2, 2) << 1, 2, 3, -1).finished(), Eigen::Vector2d(0.5, 0)};
  const Classifier m({hidden, out});
  // relu(1, -1) = (1, 0); out = (1 + 0.5, 3)
  EXPECT_EQ(m.logits(Eigen::Vector2d(1, -1)), Eigen::Vector2d(1.5, 3));
  EXPECT_EQ(m.predict(Eigen::Vector2d(1, -1)), 1);
  EXPECT_FALSE(m.is_affine());
  EXPECT_FALSE(m.as_affine().has_value());
  EXPECT_THROW(Classifier({hidden, Layer{Eigen::MatrixXd::Zero(2, 3), Eigen::VectorXd::Zero(2)}}),
               ShapeMismatch);
}

TEST(Classifier, BatchLogitsMatchNaiveOracle) {
  const std::vector<int> sizes = {4, 6, 3};
  const Classifier m = initialize_classifier(sizes, 2);
  std::mt19937_64 rng(4);
  Matrix x(5, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = std::normal_distribution<double>()(rng);
  const Matrix z = m.logits_rows(x);
  for (Eigen::Index r = 0; r < 5; ++r) {
    const std::vector<double> row(x.row(r).data(), x.row(r).data() + 4);
    const auto expected = oracle::logits(m, row);
    for (Eigen::Index c = 0; c < 3; ++c) EXPECT_NEAR(z(r, c), expected[static_cast<std::size_t>(c)], 1e-12);
  }
}

TEST(Classifier, InputJacobianMatchesFiniteDifferences) {
  const std::vector<int> sizes = {3, 8, 8, 4};
  const Classifier m = initialize_classifier(sizes, 9);
  InputGradients grads(m);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd x = oracle::random_point(3, rng);
    const LogitJacobian lj = grads.jacobian(x);
    for (int j = 0; j < 4; ++j) {
      const auto zj = [&](const Eigen::VectorXd& p) { return m.logits(p)(j); };
      EXPECT_LT(oracle::relative_error(lj.jacobian.row(j).transpose(), oracle::finite_difference(zj, x)), 1e-4);
    }
  }
}

TEST(Classifier, LinearizedDistance) {
  AffineClassifier m;
  m.weights = (Eigen::MatrixXd(2, 2) << 3, 4, 0, 0).finished();
  m.biases = Eigen::Vector2d(0, 0);
  // margin at x = 3*1 + 4*0.5 = 5, gradient norm 5
  const LinearizedDistance d = linearized_distance(Classifier(m), Eigen::Vector2d(1, 0.5));
  EXPECT_DOUBLE_EQ(d.value, 1.0);
  EXPECT_DOUBLE_EQ(d.margin, 5.0);
  EXPECT_DOUBLE_EQ(linearized_distance(Classifier(m), Eigen::Vector2d(0, 0)).value, 0.0);

  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const AffineClassifier a = oracle::random_affine(3, 2, rng);
    const Eigen::VectorXd x = oracle::random_point(3, rng);
    EXPECT_NEAR(linearized_distance(Classifier(a), x).value, exact_distance(a, x).value, 1e-9);
  }
  AffineClassifier flat;
  flat.weights = Eigen::MatrixXd::Zero(2, 2);
  flat.biases = Eigen::Vector2d(1, 0);
  EXPECT_THROW(linearized_distance(Classifier(flat), Eigen::Vector2d(1, 1)), DegenerateGradient);
}

TEST(Training, ArchitectureAndConfigParsing) {
  EXPECT_TRUE(Architecture::parse("affine").hidden.empty());
  EXPECT_EQ(Architecture::parse("mlp:16,8").hidden, (std::vector<int>{16, 8}));
  EXPECT_EQ(Architecture::parse("mlp:16,8").to_string(), "mlp:16,8");
  EXPECT_THROW(Architecture::parse("mlp:"), ConfigError);
  EXPECT_THROW(Architecture::parse("mlp:4,x"), ConfigError);
  EXPECT_THROW(parse_objective("hinge"), ConfigError);

  TrainConfig c;
  c.objective = Objective::kAdvErm;
  c.alpha = 0.5;
  EXPECT_THROW(c.validate(), ConfigError);  // no partition
  c.protected_partition = make_partition("p", {0}, 2);
  EXPECT_NO_THROW(c.validate());
  c.alpha = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Training, ZeroEpochsReturnsInitialModel) {
  const Dataset d = separable_blobs();
  TrainConfig c;
  c.epochs = 0;
  const Classifier init = initialize_classifier(Architecture{}.layer_sizes(2, 3), 4);
  const TrainResult r = train(d, init, c);
  EXPECT_EQ(r.model.layers()[0].weights, init.layers()[0].weights);
  EXPECT_TRUE(r.loss_trace.empty());
}

TEST(Training, LearnsSeparableBlobsDeterministically) {
  const Dataset d = separable_blobs();
  TrainConfig c;
  c.epochs = 200;
  c.seed = 1;
  const TrainResult a = train(d, Architecture{}, c);
  EXPECT_DOUBLE_EQ(accuracy(a.model, d), 1.0);
  EXPECT_LT(a.loss_trace.back(), a.loss_trace.front());
  const TrainResult b = train(d, Architecture{}, c);
  EXPECT_EQ(a.model.layers()[0].weights, b.model.layers()[0].weights);
  EXPECT_EQ(a.loss_trace, b.loss_trace);

  const TrainResult mlp = train(d, Architecture::parse("mlp:8"), c);
  EXPECT_GE(accuracy(mlp.model, d), 0.95);
}

TEST(Adverm, ZeroAlphaIsCrossEntropy) {
  const Dataset d = separable_blobs();
  const Classifier m = initialize_classifier(Architecture{}.layer_sizes(2, 3), 2);
  std::vector<std::size_t> rows(d.size());
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<bool> mask(d.size(), false);
  for (std::size_t i = 0; i < d.size(); i += 2) mask[i] = true;
  const Batch batch = make_batch(d, rows, mask);
  TrainConfig c;
  c.objective = Objective::kAdvErm;
  c.alpha = 0.0;
  const AdvermTerms t = adverm_loss(m, batch, c);
  EXPECT_EQ(t.loss, t.cross_entropy);
  EXPECT_FALSE(t.regularized);
}

TEST(Adverm, HandBuiltFourPointBatch) {
  // Margin z0 - z1 = x0, gradient norm 1, so d = |x0| for every row.
  AffineClassifier m;
  m.weights = (Eigen::MatrixXd(2, 2) << 0.5, 0, -0.5, 0).finished();
  m.biases = Eigen::Vector2d::Zero();
  Batch b;
  b.features = (Matrix(4, 2) << 0.5, 1, 2.0, -1, 1.0, 0, 3.0, 2).finished();
  b.labels = {0, 0, 0, 0};
  b.in_partition = {true, true, false, false};
  TrainConfig c;
  c.objective = Objective::kAdvErm;
  c.alpha = 1.0;
  c.tau = 1.0;
  c.temperature = 1.0;
  const auto s = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  const double expected = std::abs((s(0.0) + s(2.0)) / 2 - (s(-0.5) + s(1.0)) / 2);
  const AdvermTerms t = adverm_loss(Classifier(m), b, c);
  ASSERT_TRUE(t.regularized);
  EXPECT_NEAR(t.regularizer, expected, 1e-15);
  EXPECT_NEAR(t.loss, t.cross_entropy + expected, 1e-15);

  // Mirror the two sides so both relaxed means agree.
  b.features = (Matrix(4, 2) << 0.5, 1, 2.0, -1, 0.5, 0, 2.0, 2).finished();
  EXPECT_EQ(adverm_loss(Classifier(m), b, c).regularizer, 0.0);
}

TEST(Adverm, GradientMatchesFiniteDifferencesWithFrozenNorms) {
  const Dataset d = make_two_subgroup_toy(10, 1.0, 3).data;
  std::vector<std::size_t> rows(d.size());
  std::iota(rows.begin(), rows.end(), 0);
  const auto mask = partitions_of(d, PartitionSpec::parse("attribute:shape=round")).front().mask();
  const Batch batch = make_batch(d, rows, mask);
  TrainConfig c;
  c.objective = Objective::kAdvErm;
  c.alpha = 0.7;
  c.tau = 0.5;
  c.temperature = 0.5;
  for (const char* arch : {"affine", "mlp:6"}) {
    const Classifier m = initialize_classifier(Architecture::parse(arch).layer_sizes(2, 2), 8);
    const AdvermGradient g = adverm_gradient(m, batch, c);
    ASSERT_TRUE(g.terms.regularized);
    const std::vector<double> norms = g.terms.gradient_norms;
    const auto objective = [&](const Eigen::VectorXd& p) {
      return adverm_loss(unflatten(m, p), batch, c, norms).loss;
    };
    const Eigen::VectorXd numeric = oracle::finite_difference(objective, flatten(m.layers()));
    EXPECT_LT(oracle::relative_error(flatten(g.gradient), numeric), 1e-3) << arch;
  }
}

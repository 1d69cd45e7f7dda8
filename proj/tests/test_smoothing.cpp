#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>

#include "oracles/oracles.hpp"
#include "rbias/data/synthetic.hpp"
#include "rbias/error.hpp"
#include "rbias/estimates.hpp"
#include "rbias/geometry.hpp"
#include "rbias/smoothing.hpp"

using namespace rbias;

TEST(ClopperPearson, BoundaryAndAnalyticCases) {
  EXPECT_EQ(clopper_pearson_lower(0, 50, 0.001), 0.0);
  EXPECT_NEAR(clopper_pearson_lower(100, 100, 0.001), 0.93325, 1e-5);
  EXPECT_NEAR(clopper_pearson_lower(100, 100, 0.001), std::pow(0.001, 0.01), 1e-14);
  const double p = clopper_pearson_lower(1000, 1000, 0.001);
  EXPECT_NEAR(p, 0.99311, 1e-4);
  // Phi^-1(0.993116) = 2.46326 to five places (Boost and scipy agree); the
  // often-quoted 2.462 is low by about 1.3e-3.
  const boost::math::normal_distribution<double> n01;
  EXPECT_NEAR(normal_quantile(p), boost::math::quantile(n01, std::pow(0.001, 1.0 / 1000)), 1e-10);
  EXPECT_NEAR(normal_quantile(p), 2.46326, 1e-4);
}

TEST(ClopperPearson, MatchesBinomialTailBisection) {
  EXPECT_NEAR(clopper_pearson_lower(50, 100, 0.05), oracle::clopper_pearson_lower(50, 100, 0.05), 1e-6);
  for (long k : {1L, 7L, 33L, 99L}) {
    EXPECT_NEAR(clopper_pearson_lower(k, 100, 0.001), oracle::clopper_pearson_lower(k, 100, 0.001), 1e-6);
  }
  EXPECT_LT(clopper_pearson_lower(1, 1, 0.001), 0.5);  // n = 1 can never certify
}

TEST(NormalQuantile, MatchesBoost) {
  const boost::math::normal_distribution<double> n01;
  for (double p : {0.5, 0.5001, 0.6, 0.75, 0.9, 0.99, 0.99311, 0.999, 0.999999, 1 - 1e-9, 1e-7, 0.02}) {
    EXPECT_NEAR(normal_quantile(p), boost::math::quantile(n01, p), 1e-10) << p;
    EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-12) << p;
  }
}

TEST(Certify, RadiusScalesWithNoise) {
  AffineClassifier m;
  m.weights = (Eigen::MatrixXd(2, 2) << 0.5, 0, -0.5, 0).finished();
  m.biases = Eigen::Vector2d::Zero();
  SmoothingConfig c;
  c.noise_stddev = 0.1;
  // Far from the boundary every sample agrees: p_lower = alpha^(1/n).
  const Certificate a = certify(Classifier(m), Eigen::Vector2d(50, 0), c);
  c.noise_stddev = 0.2;
  const Certificate b = certify(Classifier(m), Eigen::Vector2d(50, 0), c);
  EXPECT_FALSE(a.abstained);
  EXPECT_EQ(a.count, c.n);
  EXPECT_NEAR(b.radius, 2.0 * a.radius, 1e-12);
  EXPECT_NEAR(a.radius, 0.1 * normal_quantile(std::pow(0.001, 1.0 / 1000)), 1e-12);

  // On the boundary about half the samples agree: abstain with radius 0.
  const Certificate on = certify(Classifier(m), Eigen::Vector2d(0, 0), c);
  EXPECT_TRUE(on.abstained);
  EXPECT_EQ(on.radius, 0.0);

  c.n = 1;
  EXPECT_TRUE(certify(Classifier(m), Eigen::Vector2d(50, 0), c).abstained);
}

TEST(Certify, DeterministicAndSoundOnBlobs) {
  const Dataset d = make_three_class_gaussians(40, triangle_means(3.0), 0.6, 2);
  AffineClassifier m;
  m.weights.resize(3, 2);
  const auto means = triangle_means(3.0);
  for (int i = 0; i < 3; ++i) m.weights.row(i) = means[static_cast<std::size_t>(i)].transpose();
  m.biases = Eigen::Vector3d::Zero();
  SmoothingConfig c;
  c.noise_stddev = 0.1;
  c.seed = 4;
  const auto first = certify_all(Classifier(m), d, c, 1);
  const auto again = certify_all(Classifier(m), d, c, 3);
  ASSERT_EQ(first.size(), d.size());
  std::size_t above = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(first[i].radius, again[i].radius);
    const double exact = exact_distance(m, d.features.row(static_cast<Eigen::Index>(i)).transpose()).value;
    if (first[i].radius > exact) ++above;
  }
  EXPECT_LE(above, d.size() / 100);

  const Dataset one = subset(d, {0});
  EXPECT_EQ(certify_all(Classifier(m), one, c).size(), 1u);
  const auto estimates = to_estimates(d, first, c);
  EXPECT_EQ(estimates[0].iterations, c.n0 + c.n);
  EXPECT_EQ(estimates[0].bound, BoundKind::kLower);
}

TEST(Smoothing, ConfigValidationAndMedianDistance) {
  SmoothingConfig c;
  c.noise_stddev = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SmoothingConfig{};
  c.alpha = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  Matrix x(3, 1);
  x << 0, 1, 3;  // pairwise distances 1, 2, 3
  EXPECT_DOUBLE_EQ(median_pairwise_distance(x), 2.0);
}

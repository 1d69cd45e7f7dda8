#include <gtest/gtest.h>

#include <random>

#include "oracles/oracles.hpp"
#include "rbias/data/partition.hpp"
#include "rbias/error.hpp"
#include "rbias/metrics.hpp"

using namespace rbias;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DistanceTable table_of(std::vector<double> d, std::vector<bool> correct = {}) {
  DistanceTable t;
  t.method = "exact";
  if (correct.empty()) correct.assign(d.size(), true);
  t.distances = std::move(d);
  t.correct = std::move(correct);
  return t;
}

}  // namespace

TEST(Curve, DirectCount) {
  const DistanceTable t = table_of({0.1, 0.2, 0.3, 5.0});
  const Partition p = make_partition("p", {0, 1, 2}, 4);
  const RobustnessCurve c = curve(t, p);
  EXPECT_NEAR(c.at(0.15), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(c.at(0.0), 1.0);
  EXPECT_EQ(c.at(0.3), 0.0);
  EXPECT_EQ(c.grid, (std::vector<double>{0.0, 0.1, 0.2, 0.3}));
}

TEST(Curve, MisclassifiedAndUnbounded) {
  const DistanceTable wrong = table_of({1, 2, 3}, {false, false, false});
  const RobustnessCurve c = curve(wrong, make_partition("p", {0, 1, 2}, 3));
  for (double v : c.values) EXPECT_EQ(v, 0.0);

  const DistanceTable inf = table_of({1, 2, kInf});
  const RobustnessCurve f = curve(inf, make_partition("p", {0, 1, 2}, 3));
  EXPECT_NEAR(f.at(1e9), 1.0 / 3.0, 1e-15);
}

TEST(Rb, IdenticalSidesAndRange) {
  const DistanceTable t = table_of({1, 2, 1, 2});
  const Partition p = make_partition("p", {0, 1}, 4);
  EXPECT_EQ(rb(t, p, 1.5), 0.0);
  const DistanceTable w = table_of({1, 2, 1, 2}, {false, false, true, true});
  EXPECT_THROW(rb(w, p, 1.0), NoCorrectExamples);
}

TEST(Sigma, SixPointHandExample) {
  const DistanceTable t = table_of({1, 2, 3, 1, 1, 1});
  const BiasScore s = sigma(t, make_partition("in", {0, 1, 2}, 6));
  EXPECT_EQ(s.auc_in, 2.0);
  EXPECT_EQ(s.auc_out, 1.0);
  EXPECT_EQ(s.sigma, 1.0);
}

TEST(Sigma, MatchesRiemannOracleAndSignOrdering) {
  std::mt19937_64 rng(17);
  std::exponential_distribution<double> dist(1.0);
  std::bernoulli_distribution right(0.8);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> d(30);
    std::vector<bool> correct(30);
    for (std::size_t i = 0; i < 30; ++i) {
      d[i] = dist(rng) * (i < 10 ? 2.0 : 1.0);
      correct[i] = right(rng);
    }
    d[3] = kInf;
    const DistanceTable table = table_of(d, correct);
    std::vector<std::size_t> in(10);
    std::iota(in.begin(), in.end(), 0);
    const Partition p = make_partition("p", in, 30);
    const BiasScore s = sigma(table, p);
    const double upper = table.max_finite();
    EXPECT_NEAR(s.auc_in, oracle::riemann_area(d, correct, in, upper), 1e-4);
    EXPECT_NEAR(s.auc_out, oracle::riemann_area(d, correct, p.complement(), upper), 1e-4);
    EXPECT_NEAR(s.sigma, (s.auc_in - s.auc_out) / s.auc_out, 1e-12);
    EXPECT_NEAR(area_under(curve(table, p), upper), s.auc_in, 1e-12);
  }

  // A partition pointwise more robust than its complement has sigma > 0.
  EXPECT_GT(sigma(table_of({2, 3, 4, 1, 2, 3}), make_partition("p", {0, 1, 2}, 6)).sigma, 0.0);
  EXPECT_EQ(sigma(table_of({1, 2, 1, 2}), make_partition("p", {0, 1}, 4)).sigma, 0.0);
}

TEST(Sigma, DegenerateComplement) {
  const DistanceTable t = table_of({1, 2, 1, 2}, {true, true, false, false});
  EXPECT_THROW(sigma(t, make_partition("p", {0, 1}, 4)), DegenerateComplement);
}

TEST(Agreement, IdenticalAndOpposite) {
  const std::vector<BiasScore> a = {{"p", 0.2, 0, 0, {}}, {"q", -0.1, 0, 0, {}}};
  const Agreement same = sign_agreement(a, a);
  EXPECT_EQ(same.count_agree, 2u);
  EXPECT_EQ(same.mean_diff, 0.0);
  const std::vector<BiasScore> b = {{"p", -0.3, 0, 0, {}}, {"q", 0.4, 0, 0, {}}};
  const Agreement opposite = sign_agreement(a, b);
  EXPECT_EQ(opposite.count_agree, 0u);
  EXPECT_NEAR(opposite.mean_diff, (0.5 - 0.5) / 2, 1e-15);
  EXPECT_NEAR(opposite.var_diff, 0.25, 1e-15);  // diffs 0.5 and -0.5
  const std::vector<BiasScore> renamed = {{"x", 0.2, 0, 0, {}}, {"q", -0.1, 0, 0, {}}};
  EXPECT_THROW(sign_agreement(a, renamed), DataError);
}

TEST(NoBias, ToleranceContract) {
  const DistanceTable t = table_of({0.5, 0.5, 2, 2, 0.5, 2, 2, 2});
  const std::vector<Partition> parts = {make_partition("p", {0, 1, 2, 3}, 8)};
  EXPECT_NEAR(max_rb(t, parts[0]), 0.25, 1e-15);
  EXPECT_FALSE(no_bias_check(t, parts, 0.05)[0]);
  EXPECT_TRUE(no_bias_check(t, parts, 1.0)[0]);
}

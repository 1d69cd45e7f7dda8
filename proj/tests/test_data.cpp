#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "rbias/data/dataset.hpp"
#include "rbias/data/partition.hpp"
#include "rbias/data/synthetic.hpp"
#include "rbias/error.hpp"
#include "rbias/geometry.hpp"
#include "rbias/io/csv.hpp"

using namespace rbias;

TEST(Csv, QuotesCommentsAndBlankLines) {
  const auto rows = csv::parse("# manifest=abc\na,\"b,c\"\n\n\"say \"\"hi\"\"\",2\r\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (csv::Row{"a", "b,c"}));
  EXPECT_EQ(rows[1], (csv::Row{"say \"hi\"", "2"}));
  EXPECT_EQ(csv::escape("x,y"), "\"x,y\"");
  EXPECT_EQ(csv::join({"p", "q\"r"}), "p,\"q\"\"r\"");
}

TEST(Csv, DoublesRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789, 0.0}) {
    double back = 0.0;
    ASSERT_TRUE(csv::parse_double(csv::format_double(v), back));
    EXPECT_EQ(back, v);
  }
  EXPECT_EQ(csv::format_double(std::numeric_limits<double>::infinity()), "inf");
  double inf = 0.0;
  EXPECT_TRUE(csv::parse_double("inf", inf));
  EXPECT_TRUE(std::isinf(inf));
  double junk = 0.0;
  EXPECT_FALSE(csv::parse_double("abc", junk));
  EXPECT_FALSE(csv::parse_double("1.5x", junk));
}

TEST(Dataset, ParsesFeaturesAndLabels) {
  const Dataset d = parse_csv("x0,x1,label\n1,2,a\n3,4,b\n5,6,a\n7,8,b\n", {"label", {}, {}});
  EXPECT_EQ(d.size(), 4u);
  EXPECT_EQ(d.dim(), 2);
  EXPECT_EQ(d.num_classes(), 2);
  EXPECT_EQ(d.labels, (std::vector<int>{0, 1, 0, 1}));
  EXPECT_EQ(d.features(3, 1), 8.0);
}

TEST(Dataset, AttributeColumn) {
  const Dataset d =
      parse_csv("x,gender,label\n1,F,0\n2,M,1\n3,F,1\n", {"label", {}, {"gender"}});
  ASSERT_EQ(d.attributes.count("gender"), 1u);
  EXPECT_EQ(d.attributes.at("gender").names.size(), 2u);
  EXPECT_EQ(d.dim(), 1);
}

TEST(Dataset, ErrorPaths) {
  try {
    parse_csv("x0,x1,label\n1,2,a\n3,abc,b\n", {"label", {}, {}});
    FAIL() << "expected NonNumericFeature";
  } catch (const NonNumericFeature& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.col(), 1u);
  }
  EXPECT_THROW(parse_csv("x0,label\n1,a\n", {"target", {}, {}}), MissingColumn);
  EXPECT_THROW(parse_csv("", {"label", {}, {}}), EmptyFile);
  EXPECT_THROW(parse_csv("x0,label\n", {"label", {}, {}}), EmptyFile);
}

TEST(Dataset, CsvRoundTripIsExact) {
  const TwoSubgroupToy toy = make_two_subgroup_toy(12, 1.0, 3);
  const Dataset back = parse_csv(to_csv(toy.data), schema_of(toy.data));
  EXPECT_EQ(back.features, toy.data.features);
  EXPECT_EQ(back.labels, toy.data.labels);
  EXPECT_EQ(back.class_names, toy.data.class_names);
  EXPECT_EQ(back.attributes.at("shape").codes, toy.data.attributes.at("shape").codes);
  EXPECT_EQ(to_csv(back), to_csv(toy.data));
}

TEST(Dataset, StandardizationAndSplit) {
  const Dataset d = make_three_class_gaussians(20, triangle_means(3.0), 0.5, 1);
  const Standardization s = fit_standardization(d.features);
  const Matrix z = s.apply(d.features);
  EXPECT_NEAR(z.col(0).mean(), 0.0, 1e-12);
  EXPECT_NEAR(z.col(1).array().square().mean(), 1.0, 1e-9);

  const auto [train, test] = split(d, 0.75, 9);
  EXPECT_EQ(train.size(), 45u);
  EXPECT_EQ(test.size(), 15u);
  const auto [again, unused] = split(d, 0.75, 9);
  EXPECT_EQ(again.features, train.features);
}

TEST(Partition, ClassPartitionsAreDisjointAndCover) {
  const Dataset d = make_three_class_gaussians(7, triangle_means(2.0), 0.5, 0);
  const auto parts = partitions_of(d, PartitionSpec::parse("class"));
  ASSERT_EQ(parts.size(), 3u);
  std::set<std::size_t> seen;
  for (const Partition& p : parts) {
    for (std::size_t i : p.members) EXPECT_TRUE(seen.insert(i).second);
    EXPECT_EQ(p.members.size() + p.complement().size(), d.size());
  }
  EXPECT_EQ(seen.size(), d.size());
  EXPECT_EQ(parts[0].name, "class=0");
}

TEST(Partition, AttributeWithFiveValues) {
  std::string text = "x,race,label\n";
  for (int i = 0; i < 10; ++i) text += std::to_string(i) + ",r" + std::to_string(i % 5) + "," + std::to_string(i % 2) + "\n";
  const Dataset d = parse_csv(text, {"label", {}, {"race"}});
  EXPECT_EQ(partitions_of(d, PartitionSpec::parse("attribute:race")).size(), 5u);
  const auto single = partitions_of(d, PartitionSpec::parse("attr:race=r3"));
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].members, (std::vector<std::size_t>{3, 8}));
  EXPECT_THROW(partitions_of(d, PartitionSpec::parse("attribute:gender")), UnknownAttribute);
}

TEST(Partition, SingleClassIsDegenerate) {
  Dataset d;
  d.features = Matrix::Zero(3, 1);
  d.labels = {0, 0, 0};
  d.class_names = {"a", "b"};
  EXPECT_THROW(partitions_of(d, PartitionSpec::parse("class")), DegeneratePartition);
  EXPECT_THROW(PartitionSpec::parse("by-color"), ConfigError);
}

TEST(Synthetic, ToyIsDeterministicAndMatchesTargetFractions) {
  const TwoSubgroupToy a = make_two_subgroup_toy(10, 1.0, 7);
  const TwoSubgroupToy b = make_two_subgroup_toy(10, 1.0, 7);
  EXPECT_EQ(a.data.features, b.data.features);
  EXPECT_EQ(a.data.labels, b.data.labels);

  const TwoSubgroupToy toy = make_two_subgroup_toy(100, 1.0, 7);
  const auto& shape = toy.data.attributes.at("shape");
  for (const auto* model : {&toy.boundary_a, &toy.boundary_b}) {
    std::array<int, 2> attacked{};
    for (std::size_t i = 0; i < toy.data.size(); ++i) {
      const ExactDistance e = exact_distance(*model, toy.data.features.row(static_cast<Eigen::Index>(i)).transpose());
      EXPECT_EQ(e.predicted, toy.data.labels[i]);
      if (e.value <= toy.budget) ++attacked[static_cast<std::size_t>(shape.codes[i])];
    }
    const double round = attacked[0] / 200.0;
    const double cross = attacked[1] / 200.0;
    if (model == &toy.boundary_a) {
      EXPECT_NEAR(round, 0.7, 1.0 / 200);
      EXPECT_NEAR(cross, 0.3, 1.0 / 200);
    } else {
      EXPECT_NEAR(round, 0.3, 1.0 / 200);
      EXPECT_NEAR(cross, 0.3, 1.0 / 200);
    }
  }
}

TEST(Synthetic, GaussianPreconditions) {
  EXPECT_THROW(make_three_class_gaussians(0, triangle_means(1.0), 0.5, 0), EmptyClass);
  EXPECT_THROW(make_three_class_gaussians(5, triangle_means(1.0), 0.0, 0), ConfigError);
  const auto m = triangle_means(2.0);
  EXPECT_NEAR((m[0] - m[1]).norm(), (m[1] - m[2]).norm(), 1e-12);
  EXPECT_NEAR(m[0].norm(), 2.0, 1e-12);
}

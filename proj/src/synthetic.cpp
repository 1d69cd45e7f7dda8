#include "rbias/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/LU>

#include "rbias/error.hpp"

namespace rbias {

namespace {

// Distances inside the budget are drawn from [0.2, 0.9] * budget and those
// outside from [1.2, 2.5] * budget, so an overshoot of a few percent never
// moves a point across the budget.
constexpr double kNearLo = 0.2;
constexpr double kNearHi = 0.9;
constexpr double kFarLo = 1.2;
constexpr double kFarHi = 2.5;

std::vector<double> distance_levels(std::size_t count, double near_fraction, double budget,
                                    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> near(kNearLo * budget, kNearHi * budget);
  std::uniform_real_distribution<double> far(kFarLo * budget, kFarHi * budget);
  const auto near_count = static_cast<std::size_t>(std::llround(near_fraction * static_cast<double>(count)));
  std::vector<double> levels;
  levels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) levels.push_back(i < near_count ? near(rng) : far(rng));
  return levels;
}

AffineClassifier two_class_boundary(const Eigen::Vector2d& unit_normal) {
  AffineClassifier model;
  model.weights.resize(2, 2);
  model.weights.row(0) = 0.5 * unit_normal.transpose();
  model.weights.row(1) = -0.5 * unit_normal.transpose();
  model.biases = Eigen::Vector2d::Zero();
  return model;
}

}  // namespace

TwoSubgroupToy make_two_subgroup_toy(std::size_t n_per_subgroup, double separation,
                                     std::uint64_t seed) {
  if (n_per_subgroup < 10) throw ConfigError("toy needs at least 10 points per subgroup");
  if (!(separation > 0.0)) throw ConfigError("toy separation must be positive");

  // Boundary A is the vertical axis, boundary B is tilted by 60 degrees.
  // Given signed distances (sA, sB) to both lines, the point solves
  // [nA; nB] p = [sA; sB].
  const double angle = std::numbers::pi / 3.0;
  const Eigen::Vector2d normal_a(1.0, 0.0);
  const Eigen::Vector2d normal_b(std::cos(angle), std::sin(angle));
  Eigen::Matrix2d normals;
  normals.row(0) = normal_a.transpose();
  normals.row(1) = normal_b.transpose();
  const Eigen::Matrix2d to_point = normals.inverse();

  TwoSubgroupToy toy;
  toy.budget = separation;
  toy.boundary_a = two_class_boundary(normal_a);
  toy.boundary_b = two_class_boundary(normal_b);

  Dataset& data = toy.data;
  data.class_names = {"blue", "green"};
  data.feature_names = {"x0", "x1"};
  CategoricalColumn shape;
  shape.names = {"round", "cross"};

  std::mt19937_64 rng(seed);
  const std::size_t n = n_per_subgroup;
  std::vector<Eigen::Vector2d> points;
  for (int label = 0; label < 2; ++label) {
    const double side = label == 0 ? 1.0 : -1.0;
    // Under B both subgroups share one multiset of distances.
    const std::vector<double> b_levels = distance_levels(n, 0.3, separation, rng);
    for (int group = 0; group < 2; ++group) {
      const double near_a = group == 0 ? 0.7 : 0.3;
      const std::vector<double> a_levels = distance_levels(n, near_a, separation, rng);
      std::vector<double> b_shuffled = b_levels;
      std::shuffle(b_shuffled.begin(), b_shuffled.end(), rng);
      for (std::size_t i = 0; i < n; ++i) {
        points.push_back(to_point * Eigen::Vector2d(side * a_levels[i], side * b_shuffled[i]));
        data.labels.push_back(label);
        shape.codes.push_back(group);
      }
    }
  }
  data.features.resize(static_cast<Eigen::Index>(points.size()), 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    data.features.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
  }
  data.attributes.emplace("shape", std::move(shape));
  data.validate();
  return toy;
}

TwoSubgroupToy make_margin_gap_toy(std::size_t n_per_subgroup, std::uint64_t seed) {
  if (n_per_subgroup < 1) throw EmptyClass("every subgroup needs at least one point");
  const double angle = std::numbers::pi / 4.0;
  const Eigen::Vector2d normal_a(1.0, 0.0);
  const Eigen::Vector2d normal_b(std::cos(angle), std::sin(angle));
  Eigen::Matrix2d normals;
  normals.row(0) = normal_a.transpose();
  normals.row(1) = normal_b.transpose();
  const Eigen::Matrix2d to_point = normals.inverse();

  TwoSubgroupToy toy;
  toy.budget = 1.0;
  toy.boundary_a = two_class_boundary(normal_a);
  toy.boundary_b = two_class_boundary(normal_b);
  Dataset& data = toy.data;
  data.class_names = {"blue", "green"};
  data.feature_names = {"x0", "x1"};
  CategoricalColumn shape;
  shape.names = {"round", "cross"};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> round_a(0.2, 1.0);
  std::uniform_real_distribution<double> cross_a(1.2, 2.5);
  std::uniform_real_distribution<double> any_b(0.15, 0.65);
  const std::size_t n = n_per_subgroup;
  data.features.resize(static_cast<Eigen::Index>(4 * n), 2);
  Eigen::Index row = 0;
  for (int label = 0; label < 2; ++label) {
    const double side = label == 0 ? 1.0 : -1.0;
    for (int group = 0; group < 2; ++group) {
      for (std::size_t i = 0; i < n; ++i, ++row) {
        const double sa = group == 0 ? round_a(rng) : cross_a(rng);
        const double sb = any_b(rng);
        data.features.row(row) = (to_point * Eigen::Vector2d(side * sa, side * sb)).transpose();
        data.labels.push_back(label);
        shape.codes.push_back(group);
      }
    }
  }
  data.attributes.emplace("shape", std::move(shape));
  data.validate();
  return toy;
}

Dataset make_three_class_gaussians(std::size_t n_per_class,
                                   const std::array<Eigen::Vector2d, 3>& means, double stddev,
                                   std::uint64_t seed) {
  if (n_per_class == 0) throw EmptyClass("every class needs at least one point");
  if (!(stddev > 0.0)) throw ConfigError("stddev must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, stddev);
  Dataset data;
  data.class_names = {"0", "1", "2"};
  data.feature_names = {"x0", "x1"};
  data.features.resize(static_cast<Eigen::Index>(3 * n_per_class), 2);
  Eigen::Index row = 0;
  for (int label = 0; label < 3; ++label) {
    for (std::size_t i = 0; i < n_per_class; ++i, ++row) {
      const double dx = noise(rng);
      const double dy = noise(rng);
      data.features(row, 0) = means[static_cast<std::size_t>(label)].x() + dx;
      data.features(row, 1) = means[static_cast<std::size_t>(label)].y() + dy;
      data.labels.push_back(label);
    }
  }
  data.validate();
  return data;
}

std::array<Eigen::Vector2d, 3> triangle_means(double radius) {
  std::array<Eigen::Vector2d, 3> means;
  for (int i = 0; i < 3; ++i) {
    const double angle = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * i / 3.0;
    means[static_cast<std::size_t>(i)] = radius * Eigen::Vector2d(std::cos(angle), std::sin(angle));
  }
  return means;
}

}  // namespace rbias

#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>

#include "rbias/data/dataset.hpp"
#include "rbias/models/classifier.hpp"

namespace rbias {

// Planar two-class data with a "round"/"cross" subgroup attribute ("shape")
// plus two hand-specified linear boundaries that both classify every point
// correctly. Points are placed at chosen distances from both boundaries:
// at the budget, boundary A reaches 70% of the round subgroup and 30% of the
// cross subgroup, while boundary B reaches 30% of each and sees identical
// distance multisets for the two subgroups.
struct TwoSubgroupToy {
  Dataset data;
  AffineClassifier boundary_a;
  AffineClassifier boundary_b;
  double budget = 0.0;
};

// n_per_subgroup points in each (class, subgroup) cell; budget = separation.
TwoSubgroupToy make_two_subgroup_toy(std::size_t n_per_subgroup, double separation,
                                     std::uint64_t seed);

// Two-class planar data where accuracy and subgroup fairness can both be had,
// but plain ERM prefers the unfair separator. Boundary A (vertical) leaves
// "round" points at distance U[0.2, 1.0] and "cross" points at U[1.2, 2.5];
// boundary B (tilted 45 degrees) leaves every point at U[0.15, 0.65]. Both
// separate the classes perfectly; A has the larger margins, B treats the
// subgroups alike. Attribute "shape", classes "blue"/"green".
TwoSubgroupToy make_margin_gap_toy(std::size_t n_per_subgroup, std::uint64_t seed);

// Isotropic planar Gaussian blobs, one per class.
Dataset make_three_class_gaussians(std::size_t n_per_class,
                                   const std::array<Eigen::Vector2d, 3>& means,
                                   double stddev, std::uint64_t seed);

// Means on an equilateral triangle of the given circumradius.
std::array<Eigen::Vector2d, 3> triangle_means(double radius);

}  // namespace rbias

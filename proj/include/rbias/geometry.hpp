#pragma once

#include <Eigen/Core>

#include <optional>

#include "rbias/models/classifier.hpp"

namespace rbias {

struct ExactDistance {
  double value = 0.0;     // L2, input units; +inf when no rival boundary exists
  int predicted = 0;
  int nearest_rival = 0;  // lowest index among tied minimizers
};

// Distance from x to the nearest decision boundary of an affine classifier:
//   min_{j != yhat} |(w_yhat - w_j) . x + (b_yhat - b_j)| / ||w_yhat - w_j||.
// The region where yhat wins is an intersection of half-spaces, so this
// facet minimum is the exact distance to its complement. A rival with
// identical weights but a different bias never overtakes yhat and is skipped.
// Throws DegenerateModel when a rival has identical weights and bias.
ExactDistance exact_distance(const AffineClassifier& model,
                             const Eigen::Ref<const Eigen::VectorXd>& x);

// Unit direction from x toward the nearest boundary of an affine classifier.
Eigen::VectorXd nearest_boundary_direction(const AffineClassifier& model,
                                           const Eigen::Ref<const Eigen::VectorXd>& x);

struct ProbeOptions {
  double max_radius = 10.0;
  double tol = 1e-9;
  int scan_steps = 64;       // coarse ray scan before bisection
  int max_bisections = 200;
};

// Smallest t in (0, max_radius] at which the prediction at x + t * direction
// differs from the prediction at x, to within tol. A coarse scan locates the
// first bracket that flips, then bisection refines it (at most
// max_bisections halvings). Returns nullopt if no scanned point flips.
// Throws ConfigError unless ||direction|| = 1 within 1e-9 and tol > 0.
std::optional<double> boundary_probe(const Classifier& model,
                                     const Eigen::Ref<const Eigen::VectorXd>& x,
                                     const Eigen::Ref<const Eigen::VectorXd>& direction,
                                     const ProbeOptions& options = {});

}  // namespace rbias

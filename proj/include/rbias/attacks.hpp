#pragma once

#include <Eigen/Core>

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rbias/data/dataset.hpp"
#include "rbias/estimates.hpp"
#include "rbias/models/classifier.hpp"

namespace rbias {

struct CwConfig {
  double initial_c = 1e-2;
  int binary_search_steps = 9;
  int inner_iterations = 1000;
  double learning_rate = 1e-2;
  double confidence = 0.0;  // kappa
};

// Per-dimension bounds on the adversarial point.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

struct AttackConfig {
  int max_iterations = 50;  // DeepFool
  double overshoot = 0.02;  // DeepFool eta
  CwConfig cw;
  std::optional<Box> box;

  void validate() const;
};

struct AttackResult {
  Eigen::VectorXd adversarial;
  double distance = std::numeric_limits<double>::infinity();
  bool success = false;
  int iterations_used = 0;
  // C&W only: best successful distance after each binary-search step
  // (+inf until the first success).
  std::vector<double> best_trace;
};

// Multiclass L2 DeepFool. Each step moves to the nearest boundary of the
// local linearization over all rival classes; the accumulated step is
// applied with factor (1 + overshoot). On an affine model the first step
// lands on the nearest boundary, so the attack ends after one iteration.
// Throws DegenerateGradient when every rival's linearization is flat.
AttackResult deepfool(const Classifier& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const AttackConfig& config);
AttackResult deepfool(InputGradients& gradients, const Classifier& model,
                      const Eigen::Ref<const Eigen::VectorXd>& x, const AttackConfig& config);

// Carlini-Wagner L2: gradient descent on ||x' - x||^2 + c * g(x'),
// g = max(z_yhat - max_{j != yhat} z_j, -kappa), with a binary search over c.
// With a box, x' = lo + (tanh(w) + 1) / 2 * (hi - lo) keeps the iterate in
// bounds. Returns the smallest-norm point whose prediction actually changed.
AttackResult carlini_wagner_l2(const Classifier& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                               const AttackConfig& config);
AttackResult carlini_wagner_l2(InputGradients& gradients, const Classifier& model,
                               const Eigen::Ref<const Eigen::VectorXd>& x,
                               const AttackConfig& config);

enum class AttackMethod { kDeepFool, kCarliniWagner };

std::string to_string(AttackMethod method);

// One upper-bound estimate per example. Failed attacks and per-example
// errors yield distance +inf; errors are recorded on the estimate and the
// run continues. Output order is by example index for any worker count.
std::vector<DistanceEstimate> attack_distances(const Classifier& model, const Dataset& dataset,
                                               AttackMethod method, const AttackConfig& config,
                                               unsigned workers = 1);

}  // namespace rbias

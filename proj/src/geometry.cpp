#include "rbias/geometry.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rbias/error.hpp"

namespace rbias {

ExactDistance exact_distance(const AffineClassifier& model,
                             const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.input_dim()) {
    throw ShapeMismatch("input has dimension " + std::to_string(x.size()) + ", model expects " +
                        std::to_string(model.input_dim()));
  }
  const Eigen::VectorXd z = model.weights * x + model.biases;
  ExactDistance out;
  out.predicted = argmax(z);
  out.value = std::numeric_limits<double>::infinity();
  out.nearest_rival = top_rival(z, out.predicted);

  const auto yhat = static_cast<Eigen::Index>(out.predicted);
  for (Eigen::Index j = 0; j < model.weights.rows(); ++j) {
    if (j == yhat) continue;
    const double normal = (model.weights.row(yhat) - model.weights.row(j)).norm();
    const double offset = model.biases(yhat) - model.biases(j);
    if (normal == 0.0) {
      if (offset == 0.0) {
        throw DegenerateModel("classes " + std::to_string(yhat) + " and " + std::to_string(j) +
                              " have identical scores everywhere");
      }
      continue;
    }
    const double d = std::abs(z(yhat) - z(j)) / normal;
    if (d < out.value) {
      out.value = d;
      out.nearest_rival = static_cast<int>(j);
    }
  }
  return out;
}

Eigen::VectorXd nearest_boundary_direction(const AffineClassifier& model,
                                           const Eigen::Ref<const Eigen::VectorXd>& x) {
  const ExactDistance d = exact_distance(model, x);
  if (std::isinf(d.value)) throw DegenerateModel("no reachable decision boundary");
  Eigen::VectorXd direction =
      (model.weights.row(d.nearest_rival) - model.weights.row(d.predicted)).transpose();
  return direction / direction.norm();
}

std::optional<double> boundary_probe(const Classifier& model,
                                     const Eigen::Ref<const Eigen::VectorXd>& x,
                                     const Eigen::Ref<const Eigen::VectorXd>& direction,
                                     const ProbeOptions& options) {
  if (std::abs(direction.norm() - 1.0) > 1e-9) throw ConfigError("probe direction must be a unit vector");
  if (!(options.tol > 0.0)) throw ConfigError("probe tolerance must be positive");
  if (!(options.max_radius > 0.0)) throw ConfigError("probe radius must be positive");
  if (options.scan_steps < 1 || options.max_bisections < 1) {
    throw ConfigError("probe needs at least one scan step and one bisection");
  }

  const int origin = model.predict(x);
  const auto flipped = [&](double t) {
    return model.predict(Eigen::VectorXd(x + t * direction)) != origin;
  };

  double lo = 0.0;
  double hi = -1.0;
  for (int s = 1; s <= options.scan_steps; ++s) {
    const double t = options.max_radius * static_cast<double>(s) / options.scan_steps;
    if (flipped(t)) {
      hi = t;
      break;
    }
    lo = t;
  }
  if (hi < 0.0) return std::nullopt;

  for (int i = 0; i < options.max_bisections && hi - lo > options.tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (flipped(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace rbias

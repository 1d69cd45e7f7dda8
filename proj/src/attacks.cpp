#include "rbias/attacks.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "rbias/error.hpp"
#include "rbias/parallel.hpp"

namespace rbias {

namespace {

// DeepFool steps slightly past the linearized boundary so that an exact
// landing on an affine boundary is not undone by the argmax tie-break.
constexpr double kRelativeSlack = 1e-9;
constexpr double kAbsoluteSlack = 1e-10;

// Binary search over c treats anything at or above this as "no upper bound".
constexpr double kUnboundedC = 1e10;

void check_input(const Classifier& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.input_dim()) throw ShapeMismatch("attack input has the wrong dimension");
}

Eigen::VectorXd clip(const Eigen::VectorXd& v, const std::optional<Box>& box) {
  if (!box) return v;
  return v.cwiseMax(box->lo).cwiseMin(box->hi);
}

}  // namespace

void AttackConfig::validate() const {
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(overshoot >= 0.0)) throw ConfigError("overshoot must be >= 0");
  if (cw.binary_search_steps < 1) throw ConfigError("binary_search_steps must be >= 1");
  if (cw.inner_iterations < 1) throw ConfigError("inner_iterations must be >= 1");
  if (!(cw.learning_rate > 0.0)) throw ConfigError("C&W learning rate must be positive");
  if (!(cw.initial_c > 0.0)) throw ConfigError("C&W initial c must be positive");
  if (!(cw.confidence >= 0.0)) throw ConfigError("C&W confidence must be >= 0");
  if (box) {
    if (box->lo.size() != box->hi.size()) throw ConfigError("box bounds differ in length");
    if (!(box->lo.array() < box->hi.array()).all()) throw ConfigError("box needs lo < hi");
  }
}

std::string to_string(AttackMethod method) {
  return method == AttackMethod::kDeepFool ? "deepfool" : "cw";
}

AttackResult deepfool(const Classifier& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const AttackConfig& config) {
  InputGradients gradients(model);
  return deepfool(gradients, model, x, config);
}

AttackResult deepfool(InputGradients& gradients, const Classifier& model,
                      const Eigen::Ref<const Eigen::VectorXd>& x, const AttackConfig& config) {
  config.validate();
  check_input(model, x);
  const int original = model.predict(x);
  Eigen::VectorXd total_step = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd current = x;
  AttackResult result;

  for (int it = 0; it < config.max_iterations; ++it) {
    const LogitJacobian lj = gradients.jacobian(current);
    if (argmax(lj.logits) != original) break;

    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_direction;
    for (Eigen::Index j = 0; j < lj.logits.size(); ++j) {
      if (j == original) continue;
      const Eigen::VectorXd w = (lj.jacobian.row(j) - lj.jacobian.row(original)).transpose();
      const double norm = w.norm();
      if (norm == 0.0) continue;
      const double ratio = std::abs(lj.logits(j) - lj.logits(original)) / norm;
      if (ratio < best) {
        best = ratio;
        best_direction = w / norm;
      }
    }
    if (!std::isfinite(best)) {
      throw DegenerateGradient("DeepFool linearization is flat for every rival class");
    }
    total_step += (best * (1.0 + kRelativeSlack) + kAbsoluteSlack) * best_direction;
    current = clip(x + (1.0 + config.overshoot) * total_step, config.box);
    ++result.iterations_used;
  }

  result.adversarial = current;
  result.distance = (current - x).norm();
  result.success = model.predict(current) != original;
  return result;
}

AttackResult carlini_wagner_l2(const Classifier& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                               const AttackConfig& config) {
  InputGradients gradients(model);
  return carlini_wagner_l2(gradients, model, x, config);
}

AttackResult carlini_wagner_l2(InputGradients& gradients, const Classifier& model,
                               const Eigen::Ref<const Eigen::VectorXd>& x,
                               const AttackConfig& config) {
  config.validate();
  check_input(model, x);
  const CwConfig& cw = config.cw;
  const int original = model.predict(x);
  const Eigen::Index d = x.size();
  const Eigen::Index k = model.num_classes();

  // Change of variables: the optimizer works on `v`; `to_point` maps it to
  // input space and `jacobian_diag` is d(point)/d(v).
  Eigen::VectorXd v0 = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd span_half;
  if (config.box) {
    if (config.box->lo.size() != d) throw ConfigError("box dimension does not match input");
    span_half = 0.5 * (config.box->hi - config.box->lo);
    const Eigen::VectorXd scaled =
        ((clip(x, config.box) - config.box->lo).array() / span_half.array() - 1.0)
            .cwiseMax(-1.0 + 1e-12)
            .cwiseMin(1.0 - 1e-12);
    v0 = scaled.array().atanh();
  }
  const auto to_point = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    if (!config.box) return x + v;
    return config.box->lo.array() + (v.array().tanh() + 1.0) * span_half.array();
  };

  AttackResult result;
  result.adversarial = x;
  double lower = 0.0;
  double upper = kUnboundedC;
  double c = cw.initial_c;
  Matrix seed = Matrix::Zero(1, k);

  for (int step = 0; step < cw.binary_search_steps; ++step) {
    Eigen::VectorXd v = v0;
    bool step_success = false;
    for (int it = 0; it <= cw.inner_iterations; ++it) {
      const Eigen::VectorXd point = to_point(v);
      const Eigen::VectorXd z = model.logits(point);
      const int rival = top_rival(z, original);
      const double margin = z(original) - z(rival);

      if (argmax(z) != original) {
        const double dist = (point - x).norm();
        step_success = true;
        if (dist < result.distance) {
          result.distance = dist;
          result.adversarial = point;
          result.success = true;
        }
      }
      if (it == cw.inner_iterations) break;
      ++result.iterations_used;

      Eigen::VectorXd grad = 2.0 * (point - x);
      if (margin > -cw.confidence) {
        seed.setZero();
        seed(0, original) = 1.0;
        seed(0, rival) = -1.0;
        const Matrix margin_grad = gradients.seeded(point.transpose(), seed);
        grad += c * margin_grad.row(0).transpose();
      }
      if (config.box) {
        grad.array() *= (1.0 - v.array().tanh().square()) * span_half.array();
      }
      v -= cw.learning_rate * grad;
    }
    result.best_trace.push_back(result.distance);

    if (step_success) {
      upper = std::min(upper, c);
      if (upper < kUnboundedC) c = 0.5 * (lower + upper);
    } else {
      lower = std::max(lower, c);
      c = upper < kUnboundedC ? 0.5 * (lower + upper) : c * 10.0;
    }
  }
  return result;
}

std::vector<DistanceEstimate> attack_distances(const Classifier& model, const Dataset& dataset,
                                               AttackMethod method, const AttackConfig& config,
                                               unsigned workers) {
  if (dataset.size() == 0) throw DataError("dataset is empty");
  config.validate();
  std::vector<DistanceEstimate> out(dataset.size());
  workers = std::max(1u, workers);
  std::vector<std::unique_ptr<InputGradients>> per_worker(workers);

  parallel_for(dataset.size(), workers, [&](unsigned w, std::size_t i) {
    if (!per_worker[w]) per_worker[w] = std::make_unique<InputGradients>(model);
    const Eigen::VectorXd x = dataset.features.row(static_cast<Eigen::Index>(i)).transpose();
    DistanceEstimate& e = out[i];
    e.example_index = i;
    e.true_label = dataset.labels[i];
    e.method = to_string(method);
    e.bound = BoundKind::kUpper;
    try {
      e.predicted_label = model.predict(x);
      const AttackResult r = method == AttackMethod::kDeepFool
                                 ? deepfool(*per_worker[w], model, x, config)
                                 : carlini_wagner_l2(*per_worker[w], model, x, config);
      e.success = r.success;
      e.distance = r.success ? r.distance : std::numeric_limits<double>::infinity();
      e.iterations = r.iterations_used;
    } catch (const Error& err) {
      e.success = false;
      e.distance = std::numeric_limits<double>::infinity();
      e.error = err.what();
    }
  });
  return out;
}

}  // namespace rbias

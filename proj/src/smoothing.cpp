#include "rbias/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/beta.hpp>

#include "rbias/error.hpp"
#include "rbias/io/csv.hpp"
#include "rbias/parallel.hpp"

namespace rbias {

namespace {

// Acklam's rational approximation to the normal quantile (relative error
// about 1.15e-9 before refinement).
constexpr double kA[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                         1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
constexpr double kB[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                         6.680131188771972e+01,  -1.328068155288572e+01};
constexpr double kC[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                         -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
constexpr double kD[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                         3.754408661907416e+00};
constexpr double kLowTail = 0.02425;

double tail_approximation(double q) {
  return (((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
         ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
}

double acklam(double p) {
  if (p < kLowTail) return tail_approximation(std::sqrt(-2.0 * std::log(p)));
  if (p > 1.0 - kLowTail) return -tail_approximation(std::sqrt(-2.0 * std::log1p(-p)));
  const double q = p - 0.5;
  const double r = q * q;
  return (((((kA[0] * r + kA[1]) * r + kA[2]) * r + kA[3]) * r + kA[4]) * r + kA[5]) * q /
         (((((kB[0] * r + kB[1]) * r + kB[2]) * r + kB[3]) * r + kB[4]) * r + 1.0);
}

// Upper tail 1 - Phi(x) without cancellation.
double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("normal quantile needs p in (0, 1)");
  double x = acklam(p);
  // Newton on Phi(x) - p, evaluated through whichever tail avoids cancellation.
  const double residual = x > 0.0 ? (1.0 - p) - normal_upper_tail(x) : normal_cdf(x) - p;
  x -= residual / normal_pdf(x);
  return x;
}

double clopper_pearson_lower(long k, long n, double alpha) {
  if (n < 1) throw ConfigError("Clopper-Pearson needs n >= 1");
  if (k < 0 || k > n) throw ConfigError("Clopper-Pearson needs 0 <= k <= n");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (k == 0) return 0.0;
  if (k == n) return std::pow(alpha, 1.0 / static_cast<double>(n));
  return boost::math::ibeta_inv(static_cast<double>(k), static_cast<double>(n - k + 1), alpha);
}

void SmoothingConfig::validate() const {
  if (!(noise_stddev > 0.0) || !std::isfinite(noise_stddev)) {
    throw ConfigError("noise stddev must be positive");
  }
  if (n0 < 1) throw ConfigError("n0 must be >= 1");
  if (n < 1) throw ConfigError("n must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
}

namespace {

std::vector<int> noisy_counts(const Classifier& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                              int samples, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, stddev);
  Matrix noisy(samples, x.size());
  for (Eigen::Index i = 0; i < noisy.rows(); ++i) {
    for (Eigen::Index j = 0; j < noisy.cols(); ++j) noisy(i, j) = x(j) + gauss(rng);
  }
  std::vector<int> counts(static_cast<std::size_t>(model.num_classes()), 0);
  for (int label : model.predict_rows(noisy)) ++counts[static_cast<std::size_t>(label)];
  return counts;
}

}  // namespace

Certificate certify(const Classifier& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                    const SmoothingConfig& config, std::uint64_t stream) {
  config.validate();
  if (x.size() != model.input_dim()) throw ShapeMismatch("certify input has the wrong dimension");
  std::seed_seq seed{config.seed, stream};
  std::mt19937_64 rng(seed);

  const std::vector<int> selection = noisy_counts(model, x, config.n0, config.noise_stddev, rng);
  Certificate cert;
  cert.predicted = static_cast<int>(std::max_element(selection.begin(), selection.end()) - selection.begin());

  const std::vector<int> estimation = noisy_counts(model, x, config.n, config.noise_stddev, rng);
  cert.count = estimation[static_cast<std::size_t>(cert.predicted)];
  cert.p_lower = clopper_pearson_lower(cert.count, config.n, config.alpha);
  if (cert.p_lower > 0.5) {
    cert.abstained = false;
    cert.radius = config.noise_stddev * normal_quantile(cert.p_lower);
  } else {
    cert.abstained = true;
    cert.radius = 0.0;
  }
  return cert;
}

std::vector<Certificate> certify_all(const Classifier& model, const Dataset& dataset,
                                     const SmoothingConfig& config, unsigned workers) {
  if (dataset.size() == 0) throw DataError("dataset is empty");
  config.validate();
  std::vector<Certificate> out(dataset.size());
  parallel_for(dataset.size(), workers, [&](unsigned, std::size_t i) {
    out[i] = certify(model, dataset.features.row(static_cast<Eigen::Index>(i)).transpose(), config, i);
  });
  return out;
}

std::vector<DistanceEstimate> to_estimates(const Dataset& dataset,
                                           std::span<const Certificate> certificates,
                                           const SmoothingConfig& config) {
  std::vector<DistanceEstimate> out;
  out.reserve(certificates.size());
  for (std::size_t i = 0; i < certificates.size(); ++i) {
    DistanceEstimate e;
    e.example_index = i;
    e.true_label = dataset.labels.at(i);
    e.predicted_label = certificates[i].predicted;
    e.method = "smoothing";
    e.bound = BoundKind::kLower;
    e.distance = certificates[i].radius;
    e.success = !certificates[i].abstained;
    e.iterations = config.n0 + config.n;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<DistanceEstimate> smoothing_distances(const Classifier& model, const Dataset& dataset,
                                                  const SmoothingConfig& config, unsigned workers) {
  const auto certificates = certify_all(model, dataset, config, workers);
  return to_estimates(dataset, certificates, config);
}

double median_pairwise_distance(const Matrix& features, std::size_t max_points) {
  const auto total = static_cast<std::size_t>(features.rows());
  if (total < 2) throw DataError("need at least two rows for pairwise distances");
  const std::size_t m = std::min(total, std::max<std::size_t>(max_points, 2));
  std::vector<Eigen::Index> rows(m);
  for (std::size_t i = 0; i < m; ++i) rows[i] = static_cast<Eigen::Index>(i * total / m);
  std::vector<double> distances;
  distances.reserve(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      distances.push_back((features.row(rows[i]) - features.row(rows[j])).norm());
    }
  }
  const auto mid = distances.begin() + static_cast<std::ptrdiff_t>(distances.size() / 2);
  std::nth_element(distances.begin(), mid, distances.end());
  if (distances.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(distances.begin(), mid);
  return 0.5 * (lower + upper);
}

std::string certificates_to_csv(const Dataset& dataset, std::span<const Certificate> certificates,
                                const SmoothingConfig& config, const std::string& manifest_id) {
  std::string out;
  if (!manifest_id.empty()) out += "# manifest=" + manifest_id + "\n";
  out += "example_index,smoothed_prediction,true_label,radius,p_lower,abstained,n0,n,alpha,sigma_noise\n";
  for (std::size_t i = 0; i < certificates.size(); ++i) {
    const Certificate& c = certificates[i];
    out += csv::join({std::to_string(i), std::to_string(c.predicted),
                      std::to_string(dataset.labels.at(i)), csv::format_double(c.radius),
                      csv::format_double(c.p_lower), c.abstained ? "true" : "false",
                      std::to_string(config.n0), std::to_string(config.n),
                      csv::format_double(config.alpha), csv::format_double(config.noise_stddev)});
    out += "\n";
  }
  return out;
}

}  // namespace rbias

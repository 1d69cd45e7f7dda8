#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rbias/data/dataset.hpp"
#include "rbias/estimates.hpp"
#include "rbias/models/classifier.hpp"

namespace rbias {

struct SmoothingConfig {
  double noise_stddev = 0.25;
  int n0 = 100;       // selection samples
  int n = 1000;       // estimation samples
  double alpha = 0.001;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Certificate {
  int predicted = 0;  // top class of the smoothed classifier
  double radius = 0.0;
  bool abstained = true;
  double p_lower = 0.0;
  int count = 0;      // estimation samples that hit `predicted`
};

// Monte-Carlo certification of the Gaussian-smoothed classifier. The n0
// selection samples pick the candidate class; n fresh samples give the
// one-sided Clopper-Pearson bound p_lower, and the certified L2 radius is
// noise_stddev * normal_quantile(p_lower) when p_lower > 1/2. The noise
// stream is derived from (config.seed, stream), so certify is deterministic.
Certificate certify(const Classifier& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                    const SmoothingConfig& config, std::uint64_t stream = 0);

// Certifies every example with stream = example index.
std::vector<Certificate> certify_all(const Classifier& model, const Dataset& dataset,
                                     const SmoothingConfig& config, unsigned workers = 1);

// Lower-bound estimates: distance = certified radius (0 when abstaining),
// predicted_label = smoothed prediction, success = !abstained,
// iterations = n0 + n.
std::vector<DistanceEstimate> smoothing_distances(const Classifier& model, const Dataset& dataset,
                                                  const SmoothingConfig& config,
                                                  unsigned workers = 1);
std::vector<DistanceEstimate> to_estimates(const Dataset& dataset,
                                           std::span<const Certificate> certificates,
                                           const SmoothingConfig& config);

// Exact one-sided lower confidence bound on a binomial proportion: the p
// with P[Binomial(n, p) >= k] = alpha. k = 0 gives 0, k = n gives alpha^(1/n).
double clopper_pearson_lower(long k, long n, double alpha);

// Standard normal quantile. Rational approximation refined by one Newton
// step on the CDF; absolute error below 1e-10 on [0.5, 1 - 1e-9].
double normal_quantile(double p);
double normal_cdf(double x);

// Median L2 distance over pairs of rows, using at most max_points rows
// spread evenly through the matrix.
double median_pairwise_distance(const Matrix& features, std::size_t max_points = 1000);

// Columns: example_index,smoothed_prediction,true_label,radius,p_lower,
// abstained,n0,n,alpha,sigma_noise.
std::string certificates_to_csv(const Dataset& dataset, std::span<const Certificate> certificates,
                                const SmoothingConfig& config, const std::string& manifest_id = "");

}  // namespace rbias

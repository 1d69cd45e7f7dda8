#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rbias/data/partition.hpp"
#include "rbias/estimates.hpp"

namespace rbias {

// Per-example distances (possibly +inf) and whether the relevant predictor
// got the example right, indexed by dataset row.
struct DistanceTable {
  std::string method;
  BoundKind bound = BoundKind::kExact;
  std::vector<double> distances;
  std::vector<bool> correct;

  std::size_t size() const { return distances.size(); }
  // Throws DataError on length mismatch, negative or NaN distances.
  void validate() const;
  // Largest finite distance, 0 if there is none.
  double max_finite() const;
  double failure_rate() const;

  // Estimates must cover example indices 0..N-1 exactly once.
  static DistanceTable from_estimates(std::span<const DistanceEstimate> estimates);
};

// Fraction of a partition that is correctly classified and farther than tau
// from the boundary, evaluated at grid = {0} U distinct finite member
// distances. The curve is a right-continuous step function: it equals
// values[i] on [grid[i], grid[i+1]).
struct RobustnessCurve {
  std::string partition;
  std::vector<double> grid;
  std::vector<double> values;

  double at(double tau) const;
};

RobustnessCurve curve(const DistanceTable& table, const Partition& partition);
RobustnessCurve curve(const DistanceTable& table, std::span<const std::size_t> members,
                      std::string name);

// Integral of the step curve over [0, upper]. The curve is traced as a
// staircase (both corners at every jump) and integrated with the trapezoid
// rule, which is exact for step functions.
double area_under(const RobustnessCurve& curve, double upper);

// | P(d > tau | in P, correct) - P(d > tau | not in P, correct) | with each
// side normalized by its count of correctly classified examples.
// Throws NoCorrectExamples when a side has none.
double rb(const DistanceTable& table, const Partition& partition, double tau);

struct BiasScore {
  std::string partition;
  double sigma = 0.0;
  double auc_in = 0.0;
  double auc_out = 0.0;
  std::map<double, double> rb_at;
};

// sigma = (AUC(I_P) - AUC(I_{D \ P})) / AUC(I_{D \ P}), both areas over
// [0, max finite distance in the table] with +inf distances clamped there.
// rb_at holds RB at each requested tau where both sides have correct
// examples. Throws DegenerateComplement when the complement's area is 0.
BiasScore sigma(const DistanceTable& table, const Partition& partition,
                std::span<const double> taus = {});

struct Agreement {
  std::size_t count_agree = 0;
  std::size_t total = 0;
  double mean_diff = 0.0;
  double var_diff = 0.0;  // population variance of sigma_a - sigma_b
};

// Sign agreement of sigma between two estimators over the same partitions
// (matched by name, in order). Throws DataError on a partition mismatch.
Agreement sign_agreement(std::span<const BiasScore> scores_a, std::span<const BiasScore> scores_b);

// Largest RB(P, tau) over tau >= 0. RB only changes at observed distances, so
// evaluating at {0} and every distinct finite distance in the table is exact.
double max_rb(const DistanceTable& table, const Partition& partition);

// True for each partition whose max_rb is within tolerance.
std::vector<bool> no_bias_check(const DistanceTable& table, std::span<const Partition> partitions,
                                double tolerance);

}  // namespace rbias

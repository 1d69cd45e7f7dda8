#include "rbias/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rbias/error.hpp"

namespace rbias {

namespace {

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

void check_members(const DistanceTable& table, std::span<const std::size_t> members) {
  for (std::size_t i : members) {
    if (i >= table.size()) throw DataError("partition index outside the distance table");
  }
}

struct SafeRate {
  std::size_t safe = 0;
  std::size_t correct = 0;
};

SafeRate safe_rate(const DistanceTable& table, const std::vector<bool>& mask, bool inside,
                   double tau) {
  SafeRate r;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (mask[i] != inside || !table.correct[i]) continue;
    ++r.correct;
    if (table.distances[i] > tau) ++r.safe;
  }
  return r;
}

double rb_with_mask(const DistanceTable& table, const std::vector<bool>& mask, double tau) {
  const SafeRate in = safe_rate(table, mask, true, tau);
  const SafeRate out = safe_rate(table, mask, false, tau);
  if (in.correct == 0) throw NoCorrectExamples(Side::kPartition);
  if (out.correct == 0) throw NoCorrectExamples(Side::kComplement);
  return std::abs(static_cast<double>(in.safe) / static_cast<double>(in.correct) -
                  static_cast<double>(out.safe) / static_cast<double>(out.correct));
}

std::vector<bool> table_mask(const DistanceTable& table, const Partition& partition) {
  if (partition.universe != table.size()) {
    throw DataError("partition '" + partition.name + "' does not match the distance table size");
  }
  check_members(table, partition.members);
  return partition.mask();
}

}  // namespace

void DistanceTable::validate() const {
  if (distances.size() != correct.size()) throw DataError("distance table columns differ in length");
  for (double d : distances) {
    if (std::isnan(d) || d < 0.0) throw DataError("distance table holds a negative or NaN distance");
  }
}

double DistanceTable::max_finite() const {
  double m = 0.0;
  for (double d : distances) {
    if (std::isfinite(d)) m = std::max(m, d);
  }
  return m;
}

double DistanceTable::failure_rate() const {
  if (distances.empty()) return 0.0;
  const auto failed = std::count_if(distances.begin(), distances.end(),
                                    [](double d) { return std::isinf(d); });
  return static_cast<double>(failed) / static_cast<double>(distances.size());
}

DistanceTable DistanceTable::from_estimates(std::span<const DistanceEstimate> estimates) {
  if (estimates.empty()) throw DataError("no distance estimates");
  DistanceTable table;
  table.method = estimates.front().method;
  table.bound = estimates.front().bound;
  table.distances.assign(estimates.size(), 0.0);
  table.correct.assign(estimates.size(), false);
  std::vector<bool> seen(estimates.size(), false);
  for (const DistanceEstimate& e : estimates) {
    if (e.example_index >= estimates.size() || seen[e.example_index]) {
      throw DataError("estimates must cover each example index exactly once");
    }
    if (e.method != table.method) throw DataError("estimates mix methods");
    seen[e.example_index] = true;
    table.distances[e.example_index] = e.distance;
    table.correct[e.example_index] = e.correct();
  }
  table.validate();
  return table;
}

double RobustnessCurve::at(double tau) const {
  if (grid.empty() || tau < grid.front()) return values.empty() ? 0.0 : values.front();
  const auto it = std::upper_bound(grid.begin(), grid.end(), tau);
  return values[static_cast<std::size_t>(it - grid.begin()) - 1];
}

RobustnessCurve curve(const DistanceTable& table, const Partition& partition) {
  if (partition.universe != table.size()) {
    throw DataError("partition '" + partition.name + "' does not match the distance table size");
  }
  return curve(table, partition.members, partition.name);
}

RobustnessCurve curve(const DistanceTable& table, std::span<const std::size_t> members,
                      std::string name) {
  if (members.empty()) throw DegeneratePartition("partition '" + name + "' is empty");
  check_members(table, members);

  RobustnessCurve out;
  out.partition = std::move(name);
  out.grid.push_back(0.0);
  std::vector<double> counted;
  for (std::size_t i : members) {
    const double d = table.distances[i];
    if (std::isfinite(d) && d > 0.0) out.grid.push_back(d);
    if (table.correct[i]) counted.push_back(d);
  }
  std::sort(out.grid.begin(), out.grid.end());
  out.grid.erase(std::unique(out.grid.begin(), out.grid.end()), out.grid.end());
  std::sort(counted.begin(), counted.end());

  const auto size = static_cast<double>(members.size());
  out.values.reserve(out.grid.size());
  for (double tau : out.grid) {
    const auto above = counted.end() - std::upper_bound(counted.begin(), counted.end(), tau);
    out.values.push_back(static_cast<double>(above) / size);
  }
  return out;
}

double area_under(const RobustnessCurve& curve, double upper) {
  if (curve.grid.empty() || upper <= 0.0) return 0.0;
  // Staircase vertices (t_i, v_i), (t_{i+1}, v_i), (t_{i+1}, v_{i+1}), ...
  std::vector<std::pair<double, double>> vertices;
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    const double start = curve.grid[i];
    if (start >= upper) break;
    const double stop = i + 1 < curve.grid.size() ? std::min(curve.grid[i + 1], upper) : upper;
    vertices.emplace_back(start, curve.values[i]);
    vertices.emplace_back(stop, curve.values[i]);
  }
  double area = 0.0;
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    area += 0.5 * (vertices[i].second + vertices[i - 1].second) *
            (vertices[i].first - vertices[i - 1].first);
  }
  return area;
}

namespace {

// Area under the safe-fraction curve over [0, upper]. Each correct member
// contributes a unit step that lasts min(d, upper), so the integral is their
// clamped sum over |members|. Same value as area_under(curve(...), upper) but
// rounded once instead of once per step.
double clamped_area(const DistanceTable& table, std::span<const std::size_t> members, double upper) {
  if (members.empty() || upper <= 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t i : members) {
    if (table.correct[i]) sum += std::min(table.distances[i], upper);
  }
  return sum / static_cast<double>(members.size());
}

}  // namespace

double rb(const DistanceTable& table, const Partition& partition, double tau) {
  return rb_with_mask(table, table_mask(table, partition), tau);
}

BiasScore sigma(const DistanceTable& table, const Partition& partition, std::span<const double> taus) {
  const std::vector<bool> mask = table_mask(table, partition);
  const std::vector<std::size_t> outside = partition.complement();
  if (outside.empty()) throw DegeneratePartition("partition '" + partition.name + "' has an empty complement");

  const double upper = table.max_finite();
  BiasScore score;
  score.partition = partition.name;
  score.auc_in = clamped_area(table, partition.members, upper);
  score.auc_out = clamped_area(table, outside, upper);
  if (!(score.auc_out > 0.0)) {
    throw DegenerateComplement("complement of '" + partition.name + "' has zero area under its curve");
  }
  score.sigma = (score.auc_in - score.auc_out) / score.auc_out;
  for (double tau : taus) {
    try {
      score.rb_at[tau] = rb_with_mask(table, mask, tau);
    } catch (const NoCorrectExamples&) {
    }
  }
  return score;
}

Agreement sign_agreement(std::span<const BiasScore> scores_a, std::span<const BiasScore> scores_b) {
  if (scores_a.size() != scores_b.size()) throw DataError("score lists differ in length");
  Agreement out;
  out.total = scores_a.size();
  if (out.total == 0) return out;
  std::vector<double> diffs;
  for (std::size_t i = 0; i < scores_a.size(); ++i) {
    if (scores_a[i].partition != scores_b[i].partition) {
      throw DataError("partition mismatch: '" + scores_a[i].partition + "' vs '" +
                      scores_b[i].partition + "'");
    }
    if (sign_of(scores_a[i].sigma) == sign_of(scores_b[i].sigma)) ++out.count_agree;
    diffs.push_back(scores_a[i].sigma - scores_b[i].sigma);
  }
  const auto n = static_cast<double>(diffs.size());
  for (double d : diffs) out.mean_diff += d;
  out.mean_diff /= n;
  for (double d : diffs) out.var_diff += (d - out.mean_diff) * (d - out.mean_diff);
  out.var_diff /= n;
  return out;
}

double max_rb(const DistanceTable& table, const Partition& partition) {
  const std::vector<bool> mask = table_mask(table, partition);
  std::vector<double> grid{0.0};
  for (double d : table.distances) {
    if (std::isfinite(d)) grid.push_back(d);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double best = 0.0;
  for (double tau : grid) best = std::max(best, rb_with_mask(table, mask, tau));
  return best;
}

std::vector<bool> no_bias_check(const DistanceTable& table, std::span<const Partition> partitions,
                                double tolerance) {
  std::vector<bool> out;
  out.reserve(partitions.size());
  for (const Partition& p : partitions) out.push_back(max_rb(table, p) <= tolerance);
  return out;
}

}  // namespace rbias

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "specsense/array.hpp"
#include "specsense/core_model.hpp"
#include "specsense/propagation.hpp"
#include "specsense/rng.hpp"

namespace specsense {

/// c[j][k][l]: cost of SAP k using SAP j's report on subset l.
class CostTensor {
 public:
  CostTensor() = default;
  CostTensor(int saps, int subsets, double value = 0.0)
      : data_(static_cast<std::size_t>(saps), static_cast<std::size_t>(saps),
              static_cast<std::size_t>(subsets), value) {}

  int sap_count() const { return static_cast<int>(data_.dim0()); }
  int subset_count() const { return static_cast<int>(data_.dim2()); }

  double operator()(int j, int k, int l) const { return data_(j, k, l); }
  double& operator()(int j, int k, int l) { return data_(j, k, l); }

  /// a[k][l] = sum_j c[j][k][l], the load SAP k adds to subset l.
  Array2D<double> column_sums() const;

 private:
  Array3D<double> data_;
};

/// i.i.d. U(lo, hi) costs with a zero diagonal.
CostTensor build_uniform_costs(int saps, int subsets, double lo, double hi, Rng& rng);

/// c[j][k][l] = 1 / P-hat[k][j] for neighbors; non-neighbors get 1e6 times
/// the largest neighbor cost; zero diagonal.
CostTensor build_inverse_power_costs(const Topology& topology, const ReferencePowerMap& powers,
                                     int subsets);

/// Collapses per-channel costs (one K x K matrix per channel, indexed
/// [m](j, k)) to subset costs by taking the max over each subset's channels.
CostTensor reduce_channel_costs(std::span<const Array2D<double>> per_channel,
                                const SpectrumPlan& plan);

/// Binary K x L sensing assignment stored as one subset label per SAP, so
/// every row sums to one by construction.
class Assignment {
 public:
  Assignment() = default;
  Assignment(std::vector<int> subset_of, int subset_count);

  int sap_count() const { return static_cast<int>(labels_.size()); }
  int subset_count() const { return subsets_; }
  int subset_of(int k) const { return labels_.at(static_cast<std::size_t>(k)); }
  bool x(int k, int l) const { return subset_of(k) == l; }
  std::span<const int> labels() const { return labels_; }

  std::vector<int> column_counts() const;
  bool feasible(std::span<const int> quota) const;

  bool operator==(const Assignment&) const = default;

 private:
  std::vector<int> labels_;
  int subsets_ = 0;
};

/// max_l sum_j sum_k c[j][k][l] x[k][l]. Throws InfeasibleError unless
/// the assignment meets the quota.
double objective_value(const Assignment& assignment, const CostTensor& cost,
                       std::span<const int> quota);

struct ScheduleResult {
  Assignment assignment;
  double objective = 0.0;
};

/// Exact minimizer of the min-max subset program via dynamic programming
/// over SAP bitmasks. Among optimal assignments the subsets are filled in
/// index order, each taking the lexicographically smallest member list.
/// Throws SolverLimitError for K > max_saps and InfeasibleError when the
/// quota does not sum to K.
ScheduleResult solve_exact(const CostTensor& cost, std::span<const int> quota, int max_saps = 20);

struct ClusterSet {
  std::vector<std::vector<int>> members;  // indices into the input, ascending
  std::vector<Point2> centroids;
};

/// k-means++ seeding followed by Lloyd iterations until no centroid moves
/// more than 1e-6 m (or 100 iterations). Empty clusters are refilled from
/// the largest cluster, so all `count` clusters are nonempty.
ClusterSet cluster_saps(std::span<const Point2> positions, int count, Rng& rng);

/// argmin over e in cluster of sum_{j in cluster} c[j][e][l]; ties go to the
/// smallest id.
int pick_min_cost_sap(std::span<const int> cluster, const CostTensor& cost, int subset);

/// Randomized-order clustering heuristic. Restart n draws from
/// Rng::substream(seed, Stream::restarts, n), so the first N restarts are
/// the same for any larger restart budget.
ScheduleResult heuristic_assign(const Topology& topology, const CostTensor& cost,
                                std::span<const int> quota, int restarts, std::uint64_t seed);

struct GapPoint {
  int sap_count = 0;
  double mean_gap = 0.0;
  double std_gap = 0.0;
  int instances = 0;
};

/// Relative gap (heuristic - exact) / exact on random instances: SAPs
/// uniform over 2 km x 2 km, U(0, 1000) costs, `subsets` subsets with
/// uniform quota.
std::vector<GapPoint> gap_benchmark(std::span<const int> sizes, int instances, int subsets,
                                    int restarts, std::uint64_t seed);

}  // namespace specsense

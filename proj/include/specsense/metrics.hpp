#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "specsense/core_model.hpp"
#include "specsense/decision.hpp"
#include "specsense/propagation.hpp"

namespace specsense {

/// Correctly identified available blocks over truly available blocks.
/// Absent when nothing is truly available.
std::optional<double> utilization_ratio(const DecisionMap& decisions, const GroundTruth& truth);

/// Truly busy blocks decided available over truly busy blocks. Absent when
/// nothing is busy.
std::optional<double> misdetection_probability(const DecisionMap& decisions,
                                               const GroundTruth& truth);

/// Percentage of matching verdicts among decided blocks, optionally limited
/// to `scope`. `none` verdicts are skipped. Absent when nothing is evaluated.
std::optional<double> correct_decision_pct(const DecisionMap& decisions, const GroundTruth& truth,
                                           const SensingMask* scope = nullptr);

/// Index of the nearest SAP for every device (ties to the lower index).
std::vector<int> attach_devices(const Topology& topology, std::span<const Point2> devices);

/// Devices served when each correctly identified available block at a SAP
/// carries `capacity_per_block` devices attached to that SAP, filled
/// greedily in device order.
std::size_t schedule_devices(const DecisionMap& decisions, const GroundTruth& truth,
                             std::span<const int> attachment, int capacity_per_block);

/// Streaming mean and sample standard deviation.
class RunningStats {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  /// n - 1 denominator; 0 for fewer than two samples.
  double stddev() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace specsense

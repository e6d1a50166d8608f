#include "specsense/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace specsense {

namespace {

void check_shapes(const DecisionMap& decisions, const GroundTruth& truth) {
  if (decisions.rows() != truth.busy.rows() || decisions.cols() != truth.busy.cols())
    throw std::invalid_argument("decision map and ground truth shapes differ");
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::optional<double> utilization_ratio(const DecisionMap& decisions, const GroundTruth& truth) {
  check_shapes(decisions, truth);
  std::size_t hits = 0;
  std::size_t available = 0;
  for (std::size_t idx = 0; idx < decisions.flat().size(); ++idx) {
    if (truth.busy.flat()[idx]) continue;
    ++available;
    if (decisions.flat()[idx] == Verdict::available) ++hits;
  }
  return ratio(hits, available);
}

std::optional<double> misdetection_probability(const DecisionMap& decisions,
                                               const GroundTruth& truth) {
  check_shapes(decisions, truth);
  std::size_t misses = 0;
  std::size_t busy = 0;
  for (std::size_t idx = 0; idx < decisions.flat().size(); ++idx) {
    if (!truth.busy.flat()[idx]) continue;
    ++busy;
    if (decisions.flat()[idx] == Verdict::available) ++misses;
  }
  return ratio(misses, busy);
}

std::optional<double> correct_decision_pct(const DecisionMap& decisions, const GroundTruth& truth,
                                           const SensingMask* scope) {
  check_shapes(decisions, truth);
  if (scope && (scope->rows() != decisions.rows() || scope->cols() != decisions.cols()))
    throw std::invalid_argument("scope mask shape differs");
  std::size_t correct = 0;
  std::size_t evaluated = 0;
  for (std::size_t idx = 0; idx < decisions.flat().size(); ++idx) {
    const Verdict v = decisions.flat()[idx];
    if (v == Verdict::none) continue;
    if (scope && !scope->flat()[idx]) continue;
    ++evaluated;
    if ((v == Verdict::busy) == (truth.busy.flat()[idx] != 0)) ++correct;
  }
  const auto r = ratio(correct, evaluated);
  if (!r) return std::nullopt;
  return *r * 100.0;
}

std::vector<int> attach_devices(const Topology& topology, std::span<const Point2> devices) {
  if (topology.size() == 0) throw std::invalid_argument("no SAPs to attach to");
  std::vector<int> out(devices.size());
  for (std::size_t d = 0; d < devices.size(); ++d) {
    int best = 0;
    double best_d2 = INFINITY;
    for (const auto& node : topology.nodes()) {
      const double dx = node.position.x - devices[d].x;
      const double dy = node.position.y - devices[d].y;
      const double d2 = dx * dx + dy * dy;
      if (d2 < best_d2) {
        best_d2 = d2;
        best = node.id;
      }
    }
    out[d] = best;
  }
  return out;
}

std::size_t schedule_devices(const DecisionMap& decisions, const GroundTruth& truth,
                             std::span<const int> attachment, int capacity_per_block) {
  check_shapes(decisions, truth);
  if (capacity_per_block < 1) throw std::invalid_argument("capacity per block must be >= 1");
  std::vector<std::size_t> slots(decisions.rows(), 0);
  for (std::size_t k = 0; k < decisions.rows(); ++k)
    for (std::size_t m = 0; m < decisions.cols(); ++m)
      if (decisions(k, m) == Verdict::available && !truth.busy(k, m))
        slots[k] += static_cast<std::size_t>(capacity_per_block);
  std::size_t scheduled = 0;
  for (int k : attachment) {
    auto& free = slots.at(static_cast<std::size_t>(k));
    if (free > 0) {
      --free;
      ++scheduled;
    }
  }
  return scheduled;
}

void RunningStats::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

double RunningStats::stddev() const {
  if (n_ < 2) return 0.0;
  return std::sqrt(m2_ / static_cast<double>(n_ - 1));
}

}  // namespace specsense

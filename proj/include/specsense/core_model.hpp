#pragma once

#include <span>
#include <utility>
#include <vector>

#include "specsense/rng.hpp"

namespace specsense {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

double distance(const Point2& a, const Point2& b);

/// Axis-aligned rectangle in meters.
struct Rect {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  bool operator==(const Rect&) const = default;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  bool contains(const Point2& p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
};

Point2 uniform_point(const Rect& region, Rng& rng);

/// A sensing access point. `id` equals its index in the topology.
struct SapNode {
  int id = 0;
  Point2 position;
  double height_m = 10.0;
  bool operator==(const SapNode&) const = default;
};

/// SAP deployment plus single-hop neighborhoods of radius R.
///
/// Every neighborhood contains the node itself and is sorted ascending;
/// j is in N_k exactly when distance(j, k) <= R (so the relation is
/// symmetric).
class Topology {
 public:
  Topology() = default;
  Topology(std::vector<SapNode> nodes, double neighbor_radius_m);

  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<SapNode>& nodes() const { return nodes_; }
  const SapNode& node(int k) const { return nodes_.at(static_cast<std::size_t>(k)); }
  double neighbor_radius() const { return radius_; }

  std::span<const int> neighbors(int k) const;
  bool is_neighbor(int k, int j) const;

  /// Smallest rectangle enclosing all SAP positions.
  Rect bounding_box() const;

  /// Same nodes, but every neighborhood reduced to {k}.
  Topology isolated() const;

  bool operator==(const Topology&) const = default;

 private:
  std::vector<SapNode> nodes_;
  double radius_ = 0.0;
  std::vector<std::vector<int>> neighborhoods_;
};

Topology build_grid_topology(int side_count, double spacing_m, double radius_m, double height_m);
Topology build_random_topology(int count, const Rect& region, double radius_m, double height_m,
                               Rng& rng);
Topology build_explicit_topology(std::span<const Point2> positions, double radius_m,
                                 double height_m);

/// How subset quotas q_l are chosen.
struct QuotaPolicy {
  enum class Kind { uniform, fixed };
  Kind kind = Kind::uniform;
  std::vector<int> quota;  // used when kind == fixed

  static QuotaPolicy uniform() { return {}; }
  static QuotaPolicy fixed(std::vector<int> q) { return {Kind::fixed, std::move(q)}; }
  bool operator==(const QuotaPolicy&) const = default;
};

/// Channelization of the wideband spectrum and its grouping into sensing
/// subsets of consecutive channels.
struct SpectrumPlan {
  double total_bandwidth_hz = 0.0;
  double channel_bandwidth_hz = 0.0;
  double center_frequency_hz = 0.0;
  int channels_per_subset = 1;
  int channel_count = 0;
  int subset_count = 0;
  std::vector<int> subset_quota;    // length subset_count, sums to K
  std::vector<int> channel_subset;  // length channel_count

  double band_low_hz() const { return center_frequency_hz - total_bandwidth_hz / 2.0; }
  double band_high_hz() const { return center_frequency_hz + total_bandwidth_hz / 2.0; }
  double channel_low_hz(int m) const { return band_low_hz() + m * channel_bandwidth_hz; }
  double channel_high_hz(int m) const { return channel_low_hz(m) + channel_bandwidth_hz; }

  /// Half-open channel range [first, last) of subset l.
  std::pair<int, int> subset_channels(int l) const;

  bool operator==(const SpectrumPlan&) const = default;
};

/// Builds M = floor(B/b) channels and L = floor(B/(p b)) subsets. Residual
/// channels when p does not divide M go to the last subset. Uniform quota
/// spreads K over L subsets, giving the remainder to the lowest-index
/// subsets. Throws ConfigError on b > B, p < 1, L = 0 or sum(q) != K.
SpectrumPlan build_spectrum_plan(double total_bandwidth_hz, double channel_bandwidth_hz,
                                 int channels_per_subset, int sap_count,
                                 const QuotaPolicy& quota, double center_frequency_hz = 5.43e9);

/// A transmitter occupying a flat-PSD band.
struct Incumbent {
  Point2 position;
  double height_m = 10.0;
  double tx_power_dbm = 30.0;
  double signal_center_hz = 0.0;
  double signal_bandwidth_hz = 20e6;
  bool operator==(const Incumbent&) const = default;
};

}  // namespace specsense

#include "specsense/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "specsense/error.hpp"

namespace specsense {

namespace {

// Absolute slack on the neighbor radius so lattice distances that equal R
// exactly are not lost to rounding.
constexpr double kRadiusSlackM = 1e-9;

}  // namespace

double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

Point2 uniform_point(const Rect& region, Rng& rng) {
  const double x = rng.uniform(region.x_min, region.x_max);
  const double y = rng.uniform(region.y_min, region.y_max);
  return {x, y};
}

Topology::Topology(std::vector<SapNode> nodes, double neighbor_radius_m)
    : nodes_(std::move(nodes)), radius_(neighbor_radius_m) {
  if (neighbor_radius_m < 0.0) throw std::invalid_argument("neighbor radius must be >= 0");
  const auto n = nodes_.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (nodes_[k].id != static_cast<int>(k))
      throw std::invalid_argument("SAP ids must be contiguous and equal to their index");
    if (!(nodes_[k].height_m > 0.0)) throw std::invalid_argument("SAP height must be > 0");
  }
  neighborhoods_.assign(n, {});
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      if (distance(nodes_[k].position, nodes_[j].position) <= radius_ + kRadiusSlackM)
        neighborhoods_[k].push_back(static_cast<int>(j));
    }
  }
}

std::span<const int> Topology::neighbors(int k) const {
  return neighborhoods_.at(static_cast<std::size_t>(k));
}

bool Topology::is_neighbor(int k, int j) const {
  const auto nb = neighbors(k);
  return std::binary_search(nb.begin(), nb.end(), j);
}

Rect Topology::bounding_box() const {
  if (nodes_.empty()) return {};
  Rect r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& n : nodes_) {
    r.x_min = std::min(r.x_min, n.position.x);
    r.y_min = std::min(r.y_min, n.position.y);
    r.x_max = std::max(r.x_max, n.position.x);
    r.y_max = std::max(r.y_max, n.position.y);
  }
  return r;
}

Topology Topology::isolated() const {
  Topology t = *this;
  for (std::size_t k = 0; k < t.neighborhoods_.size(); ++k)
    t.neighborhoods_[k] = {static_cast<int>(k)};
  return t;
}

Topology build_grid_topology(int side_count, double spacing_m, double radius_m, double height_m) {
  if (side_count < 1) throw std::invalid_argument("side_count must be >= 1");
  if (!(spacing_m > 0.0)) throw std::invalid_argument("spacing must be > 0");
  std::vector<SapNode> nodes;
  nodes.reserve(static_cast<std::size_t>(side_count) * side_count);
  for (int row = 0; row < side_count; ++row) {
    for (int col = 0; col < side_count; ++col) {
      const int id = static_cast<int>(nodes.size());
      nodes.push_back({id, {col * spacing_m, row * spacing_m}, height_m});
    }
  }
  return Topology(std::move(nodes), radius_m);
}

Topology build_random_topology(int count, const Rect& region, double radius_m, double height_m,
                               Rng& rng) {
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  std::vector<SapNode> nodes;
  nodes.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) nodes.push_back({k, uniform_point(region, rng), height_m});
  return Topology(std::move(nodes), radius_m);
}

Topology build_explicit_topology(std::span<const Point2> positions, double radius_m,
                                 double height_m) {
  std::vector<SapNode> nodes;
  nodes.reserve(positions.size());
  for (std::size_t k = 0; k < positions.size(); ++k)
    nodes.push_back({static_cast<int>(k), positions[k], height_m});
  return Topology(std::move(nodes), radius_m);
}

std::pair<int, int> SpectrumPlan::subset_channels(int l) const {
  if (l < 0 || l >= subset_count) throw std::out_of_range("subset index");
  const int first = l * channels_per_subset;
  const int last = (l == subset_count - 1) ? channel_count : first + channels_per_subset;
  return {first, last};
}

SpectrumPlan build_spectrum_plan(double total_bandwidth_hz, double channel_bandwidth_hz,
                                 int channels_per_subset, int sap_count, const QuotaPolicy& quota,
                                 double center_frequency_hz) {
  if (!(channel_bandwidth_hz > 0.0) || !(total_bandwidth_hz > 0.0))
    throw ConfigError("bandwidths must be positive");
  if (channel_bandwidth_hz > total_bandwidth_hz)
    throw ConfigError("channel bandwidth exceeds total bandwidth");
  if (channels_per_subset < 1) throw ConfigError("channels per subset must be >= 1");
  if (sap_count < 1) throw ConfigError("SAP count must be >= 1");

  // The relative nudge keeps exact ratios such as 80/20 from flooring to 3.
  const auto floor_ratio = [](double num, double den) {
    return static_cast<int>(std::floor(num / den * (1.0 + 1e-12)));
  };

  SpectrumPlan plan;
  plan.total_bandwidth_hz = total_bandwidth_hz;
  plan.channel_bandwidth_hz = channel_bandwidth_hz;
  plan.center_frequency_hz = center_frequency_hz;
  plan.channels_per_subset = channels_per_subset;
  plan.channel_count = floor_ratio(total_bandwidth_hz, channel_bandwidth_hz);
  plan.subset_count = floor_ratio(total_bandwidth_hz, channels_per_subset * channel_bandwidth_hz);
  if (plan.subset_count < 1)
    throw ConfigError("subset bandwidth p*b exceeds total bandwidth");

  plan.channel_subset.resize(static_cast<std::size_t>(plan.channel_count));
  for (int m = 0; m < plan.channel_count; ++m)
    plan.channel_subset[static_cast<std::size_t>(m)] =
        std::min(m / channels_per_subset, plan.subset_count - 1);

  const int L = plan.subset_count;
  if (quota.kind == QuotaPolicy::Kind::uniform) {
    plan.subset_quota.assign(static_cast<std::size_t>(L), sap_count / L);
    for (int l = 0; l < sap_count % L; ++l) ++plan.subset_quota[static_cast<std::size_t>(l)];
  } else {
    if (static_cast<int>(quota.quota.size()) != L)
      throw ConfigError("quota has " + std::to_string(quota.quota.size()) + " entries, expected " +
                        std::to_string(L));
    if (std::any_of(quota.quota.begin(), quota.quota.end(), [](int q) { return q < 0; }))
      throw ConfigError("quota entries must be >= 0");
    plan.subset_quota = quota.quota;
  }
  const int total = std::accumulate(plan.subset_quota.begin(), plan.subset_quota.end(), 0);
  if (total != sap_count)
    throw ConfigError("infeasible quota: sum is " + std::to_string(total) + " but K = " +
                      std::to_string(sap_count));
  return plan;
}

}  // namespace specsense

#include "specsense/scheduler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "specsense/error.hpp"

namespace specsense {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kBitmaskLimit = 30;

void check_quota(std::span<const int> quota, int saps, int subsets) {
  if (static_cast<int>(quota.size()) != subsets)
    throw InfeasibleError("quota length " + std::to_string(quota.size()) + " != L = " +
                          std::to_string(subsets));
  int total = 0;
  for (int q : quota) {
    if (q < 0) throw InfeasibleError("negative quota entry");
    total += q;
  }
  if (total != saps)
    throw InfeasibleError("quota sums to " + std::to_string(total) + ", K = " +
                          std::to_string(saps));
}

// Visits every q-subset of `items` in lexicographic order of the member
// list, carrying the running load sum(load[item]). Branches whose partial
// load exceeds `bound()` are skipped. `visit` returns true to stop.
template <typename Bound, typename Visit>
bool for_each_subset(std::span<const int> items, std::span<const double> load, int start, int need,
                     std::uint32_t mask, double sum, Bound&& bound, Visit&& visit) {
  if (need == 0) return visit(mask, sum);
  const int n = static_cast<int>(items.size());
  for (int idx = start; idx <= n - need; ++idx) {
    const int item = items[static_cast<std::size_t>(idx)];
    const double s = sum + load[static_cast<std::size_t>(item)];
    if (bound(s)) continue;
    if (for_each_subset(items, load, idx + 1, need - 1, mask | (1u << item), s, bound, visit))
      return true;
  }
  return false;
}

double squared_distance(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

}  // namespace

Array2D<double> CostTensor::column_sums() const {
  const auto K = static_cast<std::size_t>(sap_count());
  const auto L = static_cast<std::size_t>(subset_count());
  Array2D<double> a(K, L, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < L; ++l) {
      double s = 0.0;
      for (std::size_t j = 0; j < K; ++j) s += data_(j, k, l);
      a(k, l) = s;
    }
  return a;
}

CostTensor build_uniform_costs(int saps, int subsets, double lo, double hi, Rng& rng) {
  if (saps < 1 || subsets < 1) throw std::invalid_argument("empty cost tensor");
  if (lo < 0.0 || hi < lo) throw std::invalid_argument("uniform cost range must satisfy 0 <= lo <= hi");
  CostTensor c(saps, subsets);
  for (int j = 0; j < saps; ++j)
    for (int k = 0; k < saps; ++k)
      for (int l = 0; l < subsets; ++l) {
        const double v = rng.uniform(lo, hi);
        c(j, k, l) = (j == k) ? 0.0 : v;
      }
  return c;
}

CostTensor build_inverse_power_costs(const Topology& topology, const ReferencePowerMap& powers,
                                     int subsets) {
  const int K = topology.size();
  if (powers.sap_count() != K) throw std::invalid_argument("reference power map size mismatch");
  double max_cost = 0.0;
  for (int k = 0; k < K; ++k)
    for (const auto& [j, p] : powers.row(k)) max_cost = std::max(max_cost, 1.0 / p);
  const double penalty = 1e6 * (max_cost > 0.0 ? max_cost : 1.0);

  CostTensor c(K, subsets, penalty);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < subsets; ++l) c(k, k, l) = 0.0;
    for (const auto& [j, p] : powers.row(k))
      for (int l = 0; l < subsets; ++l) c(j, k, l) = 1.0 / p;
  }
  return c;
}

CostTensor reduce_channel_costs(std::span<const Array2D<double>> per_channel,
                                const SpectrumPlan& plan) {
  if (static_cast<int>(per_channel.size()) != plan.channel_count)
    throw std::invalid_argument("need one cost matrix per channel");
  const int K = per_channel.empty() ? 0 : static_cast<int>(per_channel.front().rows());
  CostTensor c(K, plan.subset_count, 0.0);
  for (int l = 0; l < plan.subset_count; ++l) {
    const auto [first, last] = plan.subset_channels(l);
    for (int j = 0; j < K; ++j)
      for (int k = 0; k < K; ++k) {
        double v = 0.0;
        for (int m = first; m < last; ++m) v = std::max(v, per_channel[static_cast<std::size_t>(m)](j, k));
        c(j, k, l) = v;
      }
  }
  return c;
}

Assignment::Assignment(std::vector<int> subset_of, int subset_count)
    : labels_(std::move(subset_of)), subsets_(subset_count) {
  for (int l : labels_)
    if (l < 0 || l >= subsets_) throw std::invalid_argument("subset label out of range");
}

std::vector<int> Assignment::column_counts() const {
  std::vector<int> counts(static_cast<std::size_t>(subsets_), 0);
  for (int l : labels_) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

bool Assignment::feasible(std::span<const int> quota) const {
  const auto counts = column_counts();
  return std::equal(counts.begin(), counts.end(), quota.begin(), quota.end());
}

double objective_value(const Assignment& assignment, const CostTensor& cost,
                       std::span<const int> quota) {
  if (assignment.sap_count() != cost.sap_count() ||
      assignment.subset_count() != cost.subset_count())
    throw InfeasibleError("assignment and cost dimensions differ");
  if (!assignment.feasible(quota)) throw InfeasibleError("assignment violates the subset quota");
  const auto a = cost.column_sums();
  std::vector<double> totals(static_cast<std::size_t>(cost.subset_count()), 0.0);
  for (int k = 0; k < assignment.sap_count(); ++k) {
    const int l = assignment.subset_of(k);
    totals[static_cast<std::size_t>(l)] += a(static_cast<std::size_t>(k), static_cast<std::size_t>(l));
  }
  return *std::max_element(totals.begin(), totals.end());
}

ScheduleResult solve_exact(const CostTensor& cost, std::span<const int> quota, int max_saps) {
  const int K = cost.sap_count();
  const int L = cost.subset_count();
  if (K > max_saps || K > kBitmaskLimit)
    throw SolverLimitError("exact solver refuses K = " + std::to_string(K) + " (cap " +
                           std::to_string(std::min(max_saps, kBitmaskLimit)) + ")");
  check_quota(quota, K, L);

  const auto a = cost.column_sums();
  // Loads per subset, laid out so a subset's column is contiguous.
  std::vector<std::vector<double>> load(static_cast<std::size_t>(L),
                                        std::vector<double>(static_cast<std::size_t>(K)));
  for (int l = 0; l < L; ++l)
    for (int k = 0; k < K; ++k)
      load[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] =
          a(static_cast<std::size_t>(k), static_cast<std::size_t>(l));

  std::vector<int> bins;
  std::vector<int> prefix;
  for (int l = 0, acc = 0; l < L; ++l) {
    if (quota[static_cast<std::size_t>(l)] == 0) continue;
    bins.push_back(l);
    prefix.push_back(acc);
    acc += quota[static_cast<std::size_t>(l)];
  }

  const std::uint32_t full = (1u << K) - 1u;
  // best[mask]: min over completions of the max load of the remaining bins,
  // given that the SAPs in `mask` fill the bins before level(popcount).
  std::vector<double> best(static_cast<std::size_t>(full) + 1u, kInf);
  best[full] = 0.0;

  std::vector<int> free_items;
  free_items.reserve(static_cast<std::size_t>(K));
  const auto collect_free = [&](std::uint32_t mask) {
    free_items.clear();
    for (int k = 0; k < K; ++k)
      if (!(mask & (1u << k))) free_items.push_back(k);
  };

  for (int level = static_cast<int>(bins.size()) - 1; level >= 0; --level) {
    const int used = prefix[static_cast<std::size_t>(level)];
    const int q = quota[static_cast<std::size_t>(bins[static_cast<std::size_t>(level)])];
    const auto& lv = load[static_cast<std::size_t>(bins[static_cast<std::size_t>(level)])];
    const auto visit_mask = [&](std::uint32_t mask) {
      collect_free(mask);
      double b = kInf;
      for_each_subset(
          free_items, lv, 0, q, 0u, 0.0, [&](double s) { return s >= b; },
          [&](std::uint32_t t, double s) {
            b = std::min(b, std::max(s, best[mask | t]));
            return false;
          });
      best[mask] = b;
    };
    if (used == 0) {
      visit_mask(0u);
      continue;
    }
    // Gosper's hack over masks with `used` bits set.
    const std::uint64_t limit = 1ull << K;
    for (std::uint64_t m = (1ull << used) - 1ull; m < limit;) {
      visit_mask(static_cast<std::uint32_t>(m));
      const std::uint64_t c = m & (~m + 1ull);
      const std::uint64_t r = m + c;
      m = (((r ^ m) >> 2) / c) | r;
    }
  }

  const double optimum = bins.empty() ? 0.0 : best[0];
  std::vector<int> labels(static_cast<std::size_t>(K), -1);
  std::uint32_t mask = 0u;
  for (std::size_t level = 0; level < bins.size(); ++level) {
    const int l = bins[level];
    collect_free(mask);
    std::uint32_t chosen = 0u;
    const bool found = for_each_subset(
        free_items, load[static_cast<std::size_t>(l)], 0, quota[static_cast<std::size_t>(l)], 0u,
        0.0, [&](double s) { return s > optimum; },
        [&](std::uint32_t t, double s) {
          if (std::max(s, best[mask | t]) <= optimum) {
            chosen = t;
            return true;
          }
          return false;
        });
    if (!found) throw std::logic_error("exact solver reconstruction failed");
    for (int k = 0; k < K; ++k)
      if (chosen & (1u << k)) labels[static_cast<std::size_t>(k)] = l;
    mask |= chosen;
  }

  Assignment assignment(std::move(labels), L);
  return {assignment, objective_value(assignment, cost, quota)};
}

ClusterSet cluster_saps(std::span<const Point2> positions, int count, Rng& rng) {
  const int n = static_cast<int>(positions.size());
  if (count < 1) throw std::invalid_argument("cluster count must be >= 1");
  if (count > n)
    throw std::invalid_argument("cluster count " + std::to_string(count) + " exceeds population " +
                                std::to_string(n));

  // k-means++ seeding.
  std::vector<Point2> centroids;
  centroids.reserve(static_cast<std::size_t>(count));
  std::vector<char> is_center(static_cast<std::size_t>(n), 0);
  const auto first = static_cast<int>(rng.index(static_cast<std::uint64_t>(n)));
  centroids.push_back(positions[static_cast<std::size_t>(first)]);
  is_center[static_cast<std::size_t>(first)] = 1;
  std::vector<double> d2(static_cast<std::size_t>(n));
  while (static_cast<int>(centroids.size()) < count) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = squared_distance(positions[static_cast<std::size_t>(i)], centroids.front());
      for (const auto& c : centroids)
        best = std::min(best, squared_distance(positions[static_cast<std::size_t>(i)], c));
      d2[static_cast<std::size_t>(i)] = best;
      total += best;
    }
    int pick = -1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += d2[static_cast<std::size_t>(i)];
        if (acc > target && d2[static_cast<std::size_t>(i)] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {
        for (int i = n - 1; i >= 0; --i)
          if (d2[static_cast<std::size_t>(i)] > 0.0) {
            pick = i;
            break;
          }
      }
    } else {
      for (int i = 0; i < n; ++i)
        if (!is_center[static_cast<std::size_t>(i)]) {
          pick = i;
          break;
        }
    }
    is_center[static_cast<std::size_t>(pick)] = 1;
    centroids.push_back(positions[static_cast<std::size_t>(pick)]);
  }

  std::vector<int> label(static_cast<std::size_t>(n), 0);
  const auto assign_points = [&] {
    for (int i = 0; i < n; ++i) {
      int best_c = 0;
      double best_d = kInf;
      for (int c = 0; c < count; ++c) {
        const double d = squared_distance(positions[static_cast<std::size_t>(i)],
                                          centroids[static_cast<std::size_t>(c)]);
        if (d < best_d) {
          best_d = d;
          best_c = c;
        }
      }
      label[static_cast<std::size_t>(i)] = best_c;
    }
  };

  constexpr int kMaxIterations = 100;
  constexpr double kTolerance = 1e-6;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    assign_points();
    std::vector<Point2> sums(static_cast<std::size_t>(count));
    std::vector<int> sizes(static_cast<std::size_t>(count), 0);
    for (int i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(label[static_cast<std::size_t>(i)]);
      sums[c].x += positions[static_cast<std::size_t>(i)].x;
      sums[c].y += positions[static_cast<std::size_t>(i)].y;
      ++sizes[c];
    }
    double moved = 0.0;
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (sizes[c] == 0) continue;
      const Point2 next{sums[c].x / sizes[c], sums[c].y / sizes[c]};
      moved = std::max(moved, distance(next, centroids[c]));
      centroids[c] = next;
    }
    if (moved < kTolerance) break;
  }
  assign_points();

  ClusterSet out;
  out.members.assign(static_cast<std::size_t>(count), {});
  for (int i = 0; i < n; ++i)
    out.members[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])].push_back(i);
  out.centroids = centroids;

  // Refill empty clusters (possible with duplicate positions).
  for (std::size_t c = 0; c < out.members.size(); ++c) {
    if (!out.members[c].empty()) continue;
    std::size_t donor = 0;
    for (std::size_t o = 1; o < out.members.size(); ++o)
      if (out.members[o].size() > out.members[donor].size()) donor = o;
    auto& dm = out.members[donor];
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t t = 0; t < dm.size(); ++t) {
      const double d = squared_distance(positions[static_cast<std::size_t>(dm[t])], out.centroids[donor]);
      if (d > far_d) {
        far_d = d;
        far = t;
      }
    }
    const int moved_point = dm[far];
    dm.erase(dm.begin() + static_cast<std::ptrdiff_t>(far));
    out.members[c] = {moved_point};
    out.centroids[c] = positions[static_cast<std::size_t>(moved_point)];
  }
  return out;
}

int pick_min_cost_sap(std::span<const int> cluster, const CostTensor& cost, int subset) {
  if (cluster.empty()) throw std::invalid_argument("empty cluster");
  int best_e = -1;
  double best_v = kInf;
  for (int e : cluster) {
    double v = 0.0;
    for (int j : cluster) v += cost(j, e, subset);
    if (v < best_v || (v == best_v && e < best_e)) {
      best_v = v;
      best_e = e;
    }
  }
  return best_e;
}

ScheduleResult heuristic_assign(const Topology& topology, const CostTensor& cost,
                                std::span<const int> quota, int restarts, std::uint64_t seed) {
  const int K = topology.size();
  const int L = cost.subset_count();
  if (cost.sap_count() != K) throw std::invalid_argument("cost tensor size mismatch");
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  check_quota(quota, K, L);

  ScheduleResult best;
  for (int n = 0; n < restarts; ++n) {
    Rng rng = Rng::substream(seed, Stream::restarts, static_cast<std::uint64_t>(n));
    std::vector<int> order(static_cast<std::size_t>(L));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order.begin(), order.end());

    std::vector<int> remaining(static_cast<std::size_t>(K));
    std::iota(remaining.begin(), remaining.end(), 0);
    std::vector<int> labels(static_cast<std::size_t>(K), -1);
    for (int l : order) {
      const int q = quota[static_cast<std::size_t>(l)];
      if (q == 0) continue;
      std::vector<Point2> pts;
      pts.reserve(remaining.size());
      for (int k : remaining) pts.push_back(topology.node(k).position);
      const auto clusters = cluster_saps(pts, q, rng);
      std::vector<int> members;
      for (const auto& cl : clusters.members) {
        members.clear();
        for (int idx : cl) members.push_back(remaining[static_cast<std::size_t>(idx)]);
        labels[static_cast<std::size_t>(pick_min_cost_sap(members, cost, l))] = l;
      }
      std::erase_if(remaining, [&](int k) { return labels[static_cast<std::size_t>(k)] >= 0; });
    }

    Assignment candidate(std::move(labels), L);
    const double z = objective_value(candidate, cost, quota);
    if (n == 0 || z < best.objective) best = {std::move(candidate), z};
  }
  return best;
}

std::vector<GapPoint> gap_benchmark(std::span<const int> sizes, int instances, int subsets,
                                    int restarts, std::uint64_t seed) {
  if (instances < 1) throw std::invalid_argument("instances must be >= 1");
  std::vector<GapPoint> out;
  const Rect region{0.0, 0.0, 2000.0, 2000.0};
  for (int K : sizes) {
    const auto quota =
        build_spectrum_plan(subsets, 1.0, 1, K, QuotaPolicy::uniform()).subset_quota;
    std::vector<double> gaps;
    gaps.reserve(static_cast<std::size_t>(instances));
    for (int inst = 0; inst < instances; ++inst) {
      const auto ku = static_cast<std::uint64_t>(K);
      const auto iu = static_cast<std::uint64_t>(inst);
      Rng placement = Rng::substream(seed, Stream::placement, ku, iu);
      Rng costs = Rng::substream(seed, Stream::cost_noise, ku, iu);
      const auto topology = build_random_topology(K, region, 200.0, 10.0, placement);
      const auto cost = build_uniform_costs(K, subsets, 0.0, 1000.0, costs);
      const auto exact = solve_exact(cost, quota);
      const auto heur = heuristic_assign(topology, cost, quota, restarts, mix64(seed ^ (ku << 32) ^ iu));
      gaps.push_back(exact.objective > 0.0 ? (heur.objective - exact.objective) / exact.objective
                                           : 0.0);
    }
    GapPoint p;
    p.sap_count = K;
    p.instances = instances;
    p.mean_gap = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
    double ss = 0.0;
    for (double g : gaps) ss += (g - p.mean_gap) * (g - p.mean_gap);
    p.std_gap = gaps.size() > 1 ? std::sqrt(ss / static_cast<double>(gaps.size() - 1)) : 0.0;
    out.push_back(p);
  }
  return out;
}

}  // namespace specsense

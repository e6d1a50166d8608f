#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

#include "specsense/core_model.hpp"
#include "specsense/error.hpp"
#include "specsense/scheduler.hpp"

using namespace specsense;

namespace {

// Objective recomputed straight from the triple sum.
double direct_objective(const std::vector<int>& labels, const CostTensor& c) {
  const int K = c.sap_count();
  double worst = 0.0;
  for (int l = 0; l < c.subset_count(); ++l) {
    double total = 0.0;
    for (int j = 0; j < K; ++j)
      for (int k = 0; k < K; ++k)
        if (labels[static_cast<std::size_t>(k)] == l) total += c(j, k, l);
    worst = std::max(worst, total);
  }
  return worst;
}

// Minimum over every label vector meeting the quota.
double brute_force_optimum(const CostTensor& c, const std::vector<int>& quota) {
  const int K = c.sap_count();
  const int L = c.subset_count();
  std::vector<int> labels(static_cast<std::size_t>(K), 0);
  double best = std::numeric_limits<double>::infinity();
  long total = 1;
  for (int k = 0; k < K; ++k) total *= L;
  for (long code = 0; code < total; ++code) {
    long v = code;
    std::vector<int> counts(static_cast<std::size_t>(L), 0);
    for (int k = 0; k < K; ++k) {
      labels[static_cast<std::size_t>(k)] = static_cast<int>(v % L);
      ++counts[static_cast<std::size_t>(v % L)];
      v /= L;
    }
    if (counts != quota) continue;
    best = std::min(best, direct_objective(labels, c));
  }
  return best;
}

std::vector<int> uniform_quota(int K, int L) {
  return build_spectrum_plan(L, 1.0, 1, K, QuotaPolicy::uniform()).subset_quota;
}

double sse(std::span<const Point2> pts, const std::vector<int>& members) {
  double cx = 0.0, cy = 0.0;
  for (int i : members) {
    cx += pts[static_cast<std::size_t>(i)].x;
    cy += pts[static_cast<std::size_t>(i)].y;
  }
  cx /= static_cast<double>(members.size());
  cy /= static_cast<double>(members.size());
  double s = 0.0;
  for (int i : members) {
    const auto& p = pts[static_cast<std::size_t>(i)];
    s += (p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy);
  }
  return s;
}

}  // namespace

TEST_CASE("uniform costs stay in range with a zero diagonal") {
  Rng rng(4);
  const auto c = build_uniform_costs(9, 3, 0.0, 1000.0, rng);
  for (int j = 0; j < 9; ++j)
    for (int k = 0; k < 9; ++k)
      for (int l = 0; l < 3; ++l) {
        if (j == k) {
          CHECK(c(j, k, l) == 0.0);
        } else {
          CHECK(c(j, k, l) >= 0.0);
          CHECK(c(j, k, l) <= 1000.0);
        }
      }
}

TEST_CASE("inverse reference power costs") {
  const std::vector<Point2> pts{{0, 0}, {40, 0}, {-120, 0}, {2000, 0}};
  const auto topo = build_explicit_topology(pts, 150.0, 10.0);
  const ReferencePowerMap powers({{{1, 4.0}, {2, 1.0}}, {{0, 4.0}}, {{0, 1.0}}, {}});
  const auto c = build_inverse_power_costs(topo, powers, 2);
  for (int l = 0; l < 2; ++l) {
    CHECK(c(1, 0, l) == doctest::Approx(0.25));
    CHECK(c(2, 0, l) == doctest::Approx(1.0));
    CHECK(c(1, 0, l) < c(2, 0, l));
    for (int k = 0; k < 4; ++k) CHECK(c(k, k, l) == 0.0);
    // Non-neighbors: 1e6 times the largest neighbor cost.
    CHECK(c(3, 0, l) == doctest::Approx(1e6));
    CHECK(c(2, 1, l) == doctest::Approx(1e6));
  }
}

TEST_CASE("channel costs reduce to subsets by maximum") {
  const auto plan = build_spectrum_plan(60e6, 20e6, 2, 2, QuotaPolicy::fixed({2}));
  REQUIRE(plan.subset_count == 1);
  std::vector<Array2D<double>> per(3, Array2D<double>(2, 2, 0.0));
  per[0](0, 1) = 1.0;
  per[1](0, 1) = 5.0;
  per[2](0, 1) = 3.0;  // residual channel joins the last subset
  const auto c = reduce_channel_costs(per, plan);
  CHECK(c(0, 1, 0) == 5.0);
  CHECK(c(1, 0, 0) == 0.0);
}

TEST_CASE("objective value examples") {
  const CostTensor zero(3, 2, 0.0);
  CHECK(objective_value(Assignment({0, 1, 1}, 2), zero, std::vector<int>{1, 2}) == 0.0);

  CostTensor forced(2, 1, 0.0);
  forced(0, 1, 0) = 3.0;
  forced(1, 0, 0) = 4.0;
  CHECK(objective_value(Assignment({0, 0}, 1), forced, std::vector<int>{2}) == 7.0);

  CHECK_THROWS_AS(objective_value(Assignment({0, 0, 1}, 2), zero, std::vector<int>{1, 2}),
                  InfeasibleError);
}

TEST_CASE("four SAPs, two subsets against enumeration") {
  Rng rng(21);
  const auto c = build_uniform_costs(4, 2, 0.0, 10.0, rng);
  const std::vector<int> q{2, 2};
  const auto r = solve_exact(c, q);
  CHECK(r.assignment.feasible(q));
  CHECK(r.objective == doctest::Approx(brute_force_optimum(c, q)));
  CHECK(r.objective == doctest::Approx(direct_objective({r.assignment.labels().begin(),
                                                         r.assignment.labels().end()}, c)));
}

TEST_CASE("exact solver matches brute force on random instances") {
  for (int trial = 0; trial < 60; ++trial) {
    Rng rng(static_cast<std::uint64_t>(100 + trial));
    const int K = 2 + static_cast<int>(rng.index(7));  // 2..8
    const int L = 1 + static_cast<int>(rng.index(std::min(3, K)));
    std::vector<int> q(static_cast<std::size_t>(L), 0);
    for (int k = 0; k < K; ++k) ++q[rng.index(static_cast<std::uint64_t>(L))];
    const auto c = build_uniform_costs(K, L, 0.0, 1000.0, rng);
    const auto r = solve_exact(c, q);
    CHECK(r.assignment.feasible(q));
    CHECK(r.objective == doctest::Approx(brute_force_optimum(c, q)).epsilon(1e-12));
  }
}

TEST_CASE("exact solver ties and limits") {
  // Identical costs: every subset load is c (K - 1) q_l.
  const int K = 7;
  const std::vector<int> q{3, 2, 2};
  CostTensor c(K, 3, 5.0);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < 3; ++l) c(k, k, l) = 0.0;
  const auto r = solve_exact(c, q);
  CHECK(r.objective == doctest::Approx(5.0 * (K - 1) * 3));
  // Subsets filled in order with the smallest ids.
  CHECK(std::vector<int>(r.assignment.labels().begin(), r.assignment.labels().end()) ==
        std::vector<int>{0, 0, 0, 1, 1, 2, 2});

  const auto single = solve_exact(CostTensor(5, 1, 1.0), std::vector<int>{5});
  for (int k = 0; k < 5; ++k) CHECK(single.assignment.subset_of(k) == 0);

  CHECK_THROWS_AS(solve_exact(CostTensor(21, 2, 1.0), std::vector<int>{11, 10}), SolverLimitError);
  CHECK_THROWS_AS(solve_exact(CostTensor(8, 2, 1.0), std::vector<int>{4, 3}), InfeasibleError);
  CHECK_THROWS_AS(solve_exact(CostTensor(8, 2, 1.0), std::vector<int>{8}), InfeasibleError);
}

TEST_CASE("pick_min_cost_sap") {
  CostTensor c(3, 1, 0.0);
  const double m[3][3] = {{0, 4, 6}, {2, 0, 5}, {3, 2, 0}};
  for (int j = 0; j < 3; ++j)
    for (int e = 0; e < 3; ++e) c(j, e, 0) = m[j][e];
  const std::vector<int> all{0, 1, 2};
  CHECK(pick_min_cost_sap(all, c, 0) == 0);  // column sums 5, 6, 11
  CHECK(pick_min_cost_sap(std::vector<int>{2}, c, 0) == 2);
  CHECK(pick_min_cost_sap(std::vector<int>{1, 2}, c, 0) == 1);  // 2 vs 5

  const CostTensor flat(6, 1, 1.0);
  CHECK(pick_min_cost_sap(std::vector<int>{4, 2, 5}, flat, 0) == 2);
  CHECK_THROWS(pick_min_cost_sap(std::vector<int>{}, flat, 0));
}

TEST_CASE("pick_min_cost_sap agrees with enumeration") {
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const auto c = build_uniform_costs(12, 2, 0.0, 1000.0, rng);
    std::vector<int> ids(12);
    std::iota(ids.begin(), ids.end(), 0);
    rng.shuffle(ids.begin(), ids.end());
    const auto size = 1 + rng.index(8);
    std::vector<int> cluster(ids.begin(), ids.begin() + static_cast<long>(size));
    const int l = static_cast<int>(rng.index(2));
    int best = -1;
    double best_v = std::numeric_limits<double>::infinity();
    for (int e : cluster) {
      double v = 0.0;
      for (int j : cluster) v += c(j, e, l);
      if (v < best_v || (v == best_v && e < best)) {
        best_v = v;
        best = e;
      }
    }
    CHECK(pick_min_cost_sap(cluster, c, l) == best);
  }
}

TEST_CASE("cluster_saps structure") {
  Rng rng(1);
  std::vector<Point2> pts;
  for (int i = 0; i < 12; ++i) pts.push_back(uniform_point({0, 0, 100, 100}, rng));

  Rng r1(2);
  const auto one = cluster_saps(pts, 1, r1);
  REQUIRE(one.members.size() == 1);
  CHECK(one.members[0].size() == 12);

  Rng r2(2);
  const auto singles = cluster_saps(pts, 12, r2);
  REQUIRE(singles.members.size() == 12);
  for (const auto& m : singles.members) CHECK(m.size() == 1);

  for (int count = 1; count <= 12; ++count) {
    Rng r(static_cast<std::uint64_t>(count));
    const auto cs = cluster_saps(pts, count, r);
    REQUIRE(cs.members.size() == static_cast<std::size_t>(count));
    std::vector<int> seen(12, 0);
    for (const auto& m : cs.members) {
      CHECK_FALSE(m.empty());
      CHECK(std::is_sorted(m.begin(), m.end()));
      for (int i : m) ++seen[static_cast<std::size_t>(i)];
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; }));
  }

  Rng r3(2), r4(2);
  CHECK(cluster_saps(pts, 4, r3).members == cluster_saps(pts, 4, r4).members);
  Rng r5(2);
  CHECK_THROWS(cluster_saps(pts, 13, r5));
}

TEST_CASE("two separated blobs split like the best 2-partition") {
  Rng rng(31);
  std::vector<Point2> pts;
  for (int i = 0; i < 5; ++i) pts.push_back(uniform_point({0, 0, 50, 50}, rng));
  for (int i = 0; i < 5; ++i) pts.push_back(uniform_point({1000, 1000, 1050, 1050}, rng));

  // Exhaustive search over every split into two nonempty groups.
  const int n = static_cast<int>(pts.size());
  double best = std::numeric_limits<double>::infinity();
  std::set<std::vector<int>> best_split;
  for (int mask = 1; mask < (1 << n) - 1; ++mask) {
    if (mask & 1) continue;  // fix point 0 in group b to skip mirrored splits
    std::vector<int> a, b;
    for (int i = 0; i < n; ++i) ((mask >> i) & 1 ? a : b).push_back(i);
    const double s = sse(pts, a) + sse(pts, b);
    if (s < best) {
      best = s;
      best_split = {a, b};
    }
  }
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng r(seed);
    const auto cs = cluster_saps(pts, 2, r);
    const std::set<std::vector<int>> got(cs.members.begin(), cs.members.end());
    CHECK(got == best_split);
  }
}

TEST_CASE("heuristic assignment") {
  SUBCASE("single subset") {
    const auto topo = build_grid_topology(3, 100.0, 150.0, 10.0);
    Rng rng(1);
    const auto c = build_uniform_costs(9, 1, 0.0, 1000.0, rng);
    const auto r = heuristic_assign(topo, c, std::vector<int>{9}, 3, 5);
    for (int k = 0; k < 9; ++k) CHECK(r.assignment.subset_of(k) == 0);
  }
  SUBCASE("feasible and never better than exact") {
    for (int trial = 0; trial < 25; ++trial) {
      Rng rng(static_cast<std::uint64_t>(500 + trial));
      const int K = 4 + static_cast<int>(rng.index(7));  // 4..10
      const int L = 1 + static_cast<int>(rng.index(4));
      const auto q = uniform_quota(K, L);
      const auto topo = build_random_topology(K, {0, 0, 2000, 2000}, 200.0, 10.0, rng);
      const auto c = build_uniform_costs(K, L, 0.0, 1000.0, rng);
      const auto h = heuristic_assign(topo, c, q, 4, rng.next());
      CHECK(h.assignment.feasible(q));
      CHECK(h.objective == doctest::Approx(objective_value(h.assignment, c, q)));
      CHECK(h.objective >= solve_exact(c, q).objective - 1e-9);
    }
  }
  SUBCASE("more restarts never hurt") {
    Rng rng(8);
    const auto topo = build_random_topology(16, {0, 0, 2000, 2000}, 200.0, 10.0, rng);
    const auto c = build_uniform_costs(16, 4, 0.0, 1000.0, rng);
    const std::vector<int> q{4, 4, 4, 4};
    double prev = std::numeric_limits<double>::infinity();
    for (int n : {1, 2, 4, 8, 16, 32}) {
      const double z = heuristic_assign(topo, c, q, n, 99).objective;
      CHECK(z <= prev);
      prev = z;
    }
  }
  SUBCASE("errors") {
    const auto topo = build_grid_topology(2, 100.0, 150.0, 10.0);
    const CostTensor c(4, 2, 1.0);
    CHECK_THROWS_AS(heuristic_assign(topo, c, std::vector<int>{3, 2}, 2, 1), InfeasibleError);
    CHECK_THROWS(heuristic_assign(topo, c, std::vector<int>{2, 2}, 0, 1));
  }
}

TEST_CASE("gap benchmark output shape") {
  const std::vector<int> sizes{6, 8};
  const auto pts = gap_benchmark(sizes, 5, 2, 4, 3);
  REQUIRE(pts.size() == 2);
  for (const auto& p : pts) {
    CHECK(p.instances == 5);
    CHECK(p.mean_gap >= 0.0);
    CHECK(p.std_gap >= 0.0);
  }
  const auto again = gap_benchmark(sizes, 5, 2, 4, 3);
  CHECK(again[1].mean_gap == pts[1].mean_gap);
}

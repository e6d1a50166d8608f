#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "specsense/core_model.hpp"
#include "specsense/diffusion.hpp"
#include "specsense/error.hpp"

using namespace specsense;

namespace {

// w_i = w_{i-1} + mu y_i (d_i - y_i w_{i-1}), d_i = zeta d_{i-1} + (1 - zeta) y_i, d_0 = y_0.
std::vector<double> standalone_filter(const std::vector<double>& y, double mu, double zeta,
                                      double w0) {
  std::vector<double> out;
  double w = w0;
  double d = y.empty() ? 0.0 : y[0];
  for (double yi : y) {
    d = zeta * d + (1.0 - zeta) * yi;
    w = w + mu * yi * (d - yi * w);
    out.push_back(w);
  }
  return out;
}

InputFrame random_frame(int K, int M, int N, double hi, Rng& rng) {
  InputFrame y(static_cast<std::size_t>(K), static_cast<std::size_t>(M), static_cast<std::size_t>(N));
  for (auto& v : y.flat()) v = rng.uniform(0.0, hi);
  return y;
}

Topology line_topology(int n) {
  std::vector<Point2> pts;
  for (int i = 0; i < n; ++i) pts.push_back({100.0 * i, 0.0});
  return build_explicit_topology(pts, 100.0, 10.0);
}

ReferencePowerMap powers_from_topology(const Topology& t, Rng& rng) {
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(t.size()));
  for (int k = 0; k < t.size(); ++k)
    for (int j : t.neighbors(k))
      if (j > k) {
        const double p = rng.uniform(0.1, 2.0);
        rows[static_cast<std::size_t>(k)].emplace_back(j, p);
        rows[static_cast<std::size_t>(j)].emplace_back(k, p);
      }
  for (auto& r : rows) std::sort(r.begin(), r.end());
  return ReferencePowerMap(rows);
}

DiffusionParams test_params(double mu = 0.1, int N = 50) {
  DiffusionParams p;
  p.step_size = mu;
  p.smoothing = 0.9;
  p.iterations = N;
  return p;
}

}  // namespace

TEST_CASE("per-block building blocks") {
  CHECK(smooth_energy(1.0, 2.0, 0.9) == doctest::Approx(1.1));
  CHECK(smooth_energy(3.5, 3.5, 0.37) == doctest::Approx(3.5));
  CHECK(smooth_energy(7.0, 2.0, 0.0) == 2.0);

  CHECK(compute_gamma(1.5, 3.0, 0.5) == doctest::Approx(0.0));
  CHECK(compute_gamma(1.0, 1.0, 0.0) == 1.0);
  CHECK(compute_gamma(1.1, 2.0, 0.5) == doctest::Approx(0.2));

  CHECK(adapt(0.5, 1.0, 1.0, 0.1, false) == 0.5);
  CHECK(adapt(0.5, 1.0, 1.0, 0.1, true) == doctest::Approx(0.55));

  const std::vector<double> same{0.3, 0.3, 0.3};
  const std::vector<double> w{0.2, 0.5, 0.3};
  CHECK(combine(w, same) == doctest::Approx(0.3));
  CHECK(combine(std::vector<double>{1.0}, std::vector<double>{0.7}) == 0.7);
}

TEST_CASE("alpha weights") {
  const auto self_only = alpha_weights(0.4, 0.1, 0.3, std::vector<double>{0.4});
  REQUIRE(self_only.size() == 1);
  CHECK(self_only[0] == 1.0);

  // target 0.5; neighbors at 0.4 and 0.6 are equidistant.
  const auto sym = alpha_weights(0.4, 0.1, 1.0, std::vector<double>{0.4, 0.6});
  CHECK(sym[0] == doctest::Approx(0.5));
  CHECK(sym[1] == doctest::Approx(0.5));

  // target 0.6: distances 0.1 and 0 (guarded to 1e-12).
  const auto conc = alpha_weights(0.5, 0.1, 1.0, std::vector<double>{0.5, 0.6});
  const double expected = 1e12 / (1e12 + 1.0 / 0.01);
  CHECK(std::abs(conc[1] - expected) < 1e-12);
  CHECK(std::abs(conc[1] - 1.0) < 1e-8);
  CHECK(conc[0] + conc[1] == doctest::Approx(1.0));
}

TEST_CASE("beta weights") {
  const auto even = beta_weights(std::vector<double>{2.0, 2.0});
  REQUIRE(even);
  CHECK((*even)[0] == doctest::Approx(0.5));
  const auto skew = beta_weights(std::vector<double>{3.0, 1.0});
  REQUIRE(skew);
  CHECK((*skew)[0] == doctest::Approx(0.75));
  CHECK((*skew)[1] == doctest::Approx(0.25));
  const auto one = beta_weights(std::vector<double>{0.3});
  REQUIRE(one);
  CHECK((*one)[0] == 1.0);
  CHECK_FALSE(beta_weights(std::vector<double>{}));
  CHECK_FALSE(beta_weights(std::vector<double>{0.0, 0.0}));
}

TEST_CASE("scalar recursion reaches its fixed point monotonically") {
  for (double c : {0.5, 1.0, 2.0}) {
    const double mu = 0.5 / (c * c);
    const auto traj = standalone_filter(std::vector<double>(400, c), mu, 0.95, 0.0);
    double prev = 0.0;
    for (double w : traj) {
      CHECK(w >= prev);
      CHECK(w <= 1.0 + 1e-12);
      prev = w;
    }
    CHECK(traj.back() == doctest::Approx(1.0).epsilon(1e-9));

    // Same through the engine on a one-SAP network.
    const auto topo = build_grid_topology(1, 100.0, 100.0, 10.0);
    InputFrame y(1, 1, 400, c);
    auto p = test_params(mu, 400);
    p.smoothing = 0.95;
    const auto s = run_diffusion(y, topo, full_sensing_mask(1, 1), nullptr, p);
    CHECK(s.w(0, 0) == traj.back());
  }
}

TEST_CASE("parameter validation") {
  auto p = test_params();
  p.smoothing = 1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = test_params();
  p.step_size = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = test_params();
  p.iterations = -1;
  CHECK_THROWS_AS(p.validate(), ConfigError);

  const auto topo = build_grid_topology(2, 100.0, 150.0, 10.0);
  SensingMask partial(4, 2, 1);
  partial(0, 1) = 0;
  CHECK_THROWS(DiffusionEngine(topo, partial, nullptr, test_params()));
  CHECK_THROWS(DiffusionEngine(topo, SensingMask(3, 2, 1), nullptr, test_params()));
}

TEST_CASE("zero iterations return the initial state") {
  const auto topo = build_grid_topology(2, 100.0, 150.0, 10.0);
  Rng rng(1);
  const auto y = random_frame(4, 3, 10, 2.0, rng);
  auto p = test_params();
  p.iterations = 0;
  p.initial_weight = 0.25;
  const auto s = run_diffusion(y, topo, full_sensing_mask(4, 3), nullptr, p);
  CHECK(s.iteration == 0);
  for (double v : s.w.flat()) CHECK(v == 0.25);
  for (int k = 0; k < 4; ++k)
    for (int m = 0; m < 3; ++m) CHECK(s.d(k, m) == y(k, m, 0));
}

TEST_CASE("co-located SAPs with identical data follow identical trajectories") {
  const std::vector<Point2> pts{{0, 0}, {0, 0}, {150, 0}};
  const auto topo = build_explicit_topology(pts, 200.0, 10.0);
  Rng rng(2);
  auto y = random_frame(3, 2, 60, 1.5, rng);
  for (std::size_t m = 0; m < 2; ++m)
    for (std::size_t i = 0; i < 60; ++i) y(1, m, i) = y(0, m, i);
  const DiffusionEngine engine(topo, full_sensing_mask(3, 2), nullptr, test_params(0.1, 60));
  bool all_equal = true;
  auto state = engine.initial_state(y);
  for (int i = 0; i < 60; ++i) {
    engine.step(state, y);
    for (std::size_t m = 0; m < 2; ++m) all_equal = all_equal && state.w(0, m) == state.w(1, m);
  }
  CHECK(all_equal);
}

TEST_CASE("self-only graph reduces to the standalone filter exactly") {
  Rng rng(3);
  const auto grid = build_grid_topology(3, 100.0, 150.0, 10.0);
  const auto iso = grid.isolated();
  const auto y = random_frame(9, 4, 80, 1.2, rng);
  const auto p = test_params(0.2, 80);
  const DiffusionEngine engine(iso, full_sensing_mask(9, 4), nullptr, p);
  std::vector<std::vector<double>> traj(36);
  engine.run(y, nullptr, [&](int k, int m, int, double w, double, double) {
    traj[static_cast<std::size_t>(k * 4 + m)].push_back(w);
  });
  for (int k = 0; k < 9; ++k)
    for (int m = 0; m < 4; ++m) {
      std::vector<double> series;
      for (int i = 0; i < 80; ++i) series.push_back(y(static_cast<std::size_t>(k), static_cast<std::size_t>(m), static_cast<std::size_t>(i)));
      CHECK(traj[static_cast<std::size_t>(k * 4 + m)] == standalone_filter(series, 0.2, 0.9, 0.0));
    }
}

TEST_CASE("weights stay on the simplex") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    Rng rng(seed);
    const auto topo = build_random_topology(20, {0, 0, 600, 600}, 200.0, 10.0, rng);
    const auto powers = powers_from_topology(topo, rng);
    const auto y = random_frame(20, 3, 40, 2.0, rng);
    SensingMask senses(20, 3, 0);
    for (std::size_t k = 0; k < 20; ++k) senses(k, rng.index(3)) = 1;
    auto p = test_params(0.1, 40);
    for (auto beta : {BetaSet::informative, BetaSet::all_neighbors}) {
      p.beta_set = beta;
      int alpha_seen = 0, beta_seen = 0;
      bool ok = true;
      const DiffusionEngine engine(topo, senses, &powers, p);
      engine.run(y, [&](int, int, int, bool is_alpha, std::span<const double> w) {
        (is_alpha ? alpha_seen : beta_seen)++;
        double s = 0.0;
        for (double v : w) {
          ok = ok && v >= 0.0 && std::isfinite(v);
          s += v;
        }
        ok = ok && std::abs(s - 1.0) <= 1e-9;
      });
      CHECK(ok);
      CHECK(alpha_seen == 20 * 40);
      CHECK(beta_seen > 0);
    }
  }
}

TEST_CASE("locality under non-neighbor perturbation") {
  const auto topo = line_topology(6);
  Rng rng(4);
  const auto powers = powers_from_topology(topo, rng);
  const auto y = random_frame(6, 2, 5, 1.5, rng);
  auto perturbed = y;
  for (std::size_t m = 0; m < 2; ++m)
    for (std::size_t i = 0; i < 5; ++i) perturbed(5, m, i) += 3.0;

  SensingMask alternating(6, 2, 0);
  for (std::size_t k = 0; k < 6; ++k) alternating(k, k % 2) = 1;

  const SensingMask full = full_sensing_mask(6, 2);
  for (const SensingMask* mask : std::initializer_list<const SensingMask*>{&full, &alternating}) {
    const SensingMask& senses = *mask;
    const DiffusionEngine engine(topo, senses, &powers, test_params(0.1, 5));
    auto a = engine.initial_state(y);
    auto b = engine.initial_state(perturbed);
    for (int it = 1; it <= 5; ++it) {
      engine.step(a, y);
      engine.step(b, perturbed);
      // After `it` rounds, SAP 5's data has reached only hops <= it.
      for (int k = 0; k < 6; ++k) {
        const int hops = 5 - k;
        if (hops <= it) continue;
        for (std::size_t m = 0; m < 2; ++m) CHECK(a.w(static_cast<std::size_t>(k), m) == b.w(static_cast<std::size_t>(k), m));
      }
    }
    CHECK((a.w(4, 0) != b.w(4, 0) || a.w(4, 1) != b.w(4, 1)));
  }
}

TEST_CASE("stability for mu <= 1/y_max^2") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    Rng rng(seed);
    const double y_max = rng.uniform(0.5, 20.0);
    const auto topo = build_random_topology(15, {0, 0, 500, 500}, 200.0, 10.0, rng);
    const auto powers = powers_from_topology(topo, rng);
    const auto y = random_frame(15, 2, 300, y_max, rng);
    SensingMask senses(15, 2, 0);
    for (std::size_t k = 0; k < 15; ++k) senses(k, k % 2) = 1;
    for (double w0 : {0.0, 0.5, 3.0}) {
      auto p = test_params(1.0 / (y_max * y_max), 300);
      p.initial_weight = w0;
      const double bound = std::max(1.0, w0) + 1.0;
      const SensingMask full = full_sensing_mask(15, 2);
      for (const SensingMask* mask : std::initializer_list<const SensingMask*>{&senses, &full}) {
        bool ok = true;
        DiffusionEngine(topo, *mask, &powers, p)
            .run(y, nullptr, [&](int, int, int, double w, double, double) {
              ok = ok && std::isfinite(w) && std::abs(w) <= bound;
            });
        CHECK(ok);
      }
    }
  }
}

TEST_CASE("two SAPs, two subsets: hand trace of three rounds") {
  // SAP 0 senses channel 0, SAP 1 senses channel 1; each learns the other
  // channel only through the neighbor's weight.
  const std::vector<Point2> pts{{0, 0}, {100, 0}};
  const auto topo = build_explicit_topology(pts, 150.0, 10.0);
  const ReferencePowerMap powers({{{1, 0.5}}, {{0, 0.5}}});
  SensingMask senses(2, 2, 0);
  senses(0, 0) = 1;
  senses(1, 1) = 1;
  const double mu = 0.1, zeta = 0.9, a = 0.8, b = 1.2;
  InputFrame y(2, 2, 3, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    y(0, 0, i) = a;
    y(1, 1, i) = b;
  }
  auto p = test_params(mu, 3);
  p.smoothing = zeta;
  const DiffusionEngine engine(topo, senses, &powers, p);
  auto s = engine.initial_state(y);

  // Hand evaluation. Round 1: both neighbors at 0, alpha = [1/2, 1/2], psi = 0,
  // d = y, so w = mu y^2.
  const double w1_own0 = mu * a * a;  // 0.064
  const double w1_own1 = mu * b * b;  // 0.144
  engine.step(s, y);
  CHECK(s.w(0, 0) == doctest::Approx(0.064));
  CHECK(s.w(1, 1) == doctest::Approx(0.144));
  CHECK(s.w(0, 1) == 0.0);
  CHECK(s.w(1, 0) == 0.0);
  CHECK(w1_own0 == doctest::Approx(0.064));

  // Round 2 for SAP 0, channel 0: gamma = (a - a w) a, target = w + mu gamma,
  // neighbors {w_self, 0}.
  auto sensed_round = [&](double w_self, double w_other, double yv) {
    const double g = (yv - yv * w_self) * yv;
    const double t = w_self + mu * g;
    const double as = 1.0 / ((t - w_self) * (t - w_self));
    const double ao = 1.0 / ((t - w_other) * (t - w_other));
    const double psi = (as * w_self + ao * w_other) / (as + ao);
    return psi + mu * yv * (yv - yv * psi);
  };
  const double w2_own0 = sensed_round(w1_own0, 0.0, a);
  const double w2_own1 = sensed_round(w1_own1, 0.0, b);
  engine.step(s, y);
  CHECK(s.w(0, 0) == doctest::Approx(w2_own0).epsilon(1e-12));
  CHECK(s.w(1, 1) == doctest::Approx(w2_own1).epsilon(1e-12));
  CHECK(s.w(0, 1) == w1_own1);  // copied from SAP 1's previous round
  CHECK(s.w(1, 0) == w1_own0);

  const double w3_own0 = sensed_round(w2_own0, w1_own0, a);
  engine.step(s, y);
  CHECK(s.w(0, 0) == doctest::Approx(w3_own0).epsilon(1e-12));
  CHECK(s.w(0, 1) == doctest::Approx(w2_own1).epsilon(1e-12));
  CHECK(s.w(1, 0) == doctest::Approx(w2_own0).epsilon(1e-12));
}

TEST_CASE("blocks without informative neighbors stay frozen") {
  const auto topo = line_topology(3);
  Rng rng(6);
  const auto powers = powers_from_topology(topo, rng);
  const auto y = random_frame(3, 2, 10, 1.0, rng);
  SensingMask senses(3, 2, 0);
  for (std::size_t k = 0; k < 3; ++k) senses(k, 0) = 1;  // nobody senses channel 1
  auto p = test_params(0.1, 10);
  p.initial_weight = 0.4;
  const auto s = run_diffusion(y, topo, senses, &powers, p);
  for (std::size_t k = 0; k < 3; ++k) CHECK(s.w(k, 1) == 0.4);
}

TEST_CASE("detector scale") {
  const DetectorScale log_scale{InputScale::log, 1e-6, 1e-9};
  CHECK(log_scale(1e-9) == doctest::Approx(0.0));
  CHECK(log_scale(1e-6) == doctest::Approx(1.0));
  CHECK(log_scale(1e-3) == doctest::Approx(2.0));
  const DetectorScale lin{InputScale::linear, 2e-6, 1e-9};
  CHECK(lin(1e-6) == doctest::Approx(0.5));

  MeasurementFrame frame(1, 1, 2, 1e-9);
  frame(0, 0, 1) = 1e-6;
  const auto y = normalize_measurements(frame, log_scale);
  CHECK(y(0, 0, 0) == doctest::Approx(0.0));
  CHECK(y(0, 0, 1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(normalize_measurements(frame, DetectorScale{InputScale::log, 1e-9, 1e-9}),
                  ConfigError);
}

TEST_CASE("threshold calibration") {
  const auto topo = build_grid_topology(2, 100.0, 150.0, 10.0);
  const auto senses = full_sensing_mask(4, 2);
  const DetectorScale scale{InputScale::linear, 1e-6, 1e-9};
  auto p = test_params(0.1, 600);

  // No fading: every block sees the same constant input, so lambda equals
  // the scalar recursion after N steps.
  const double c = scale(1e-6);
  const auto flat = calibrate_threshold(topo, senses, nullptr, p, scale, FadingModel::none, 1,
                                        1e-6, 3, 5);
  const double oracle = standalone_filter(std::vector<double>(600, c), 0.1, 0.9, 0.0).back();
  for (double v : flat.flat()) CHECK(v == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(oracle == doctest::Approx(1.0).epsilon(1e-9));

  const auto a = calibrate_threshold(topo, senses, nullptr, DiffusionParams{}, DetectorScale{},
                                     FadingModel::rayleigh, 1, 1e-6, 4, 11);
  const auto b = calibrate_threshold(topo, senses, nullptr, DiffusionParams{}, DetectorScale{},
                                     FadingModel::rayleigh, 1, 1e-6, 4, 11);
  CHECK(a == b);
  for (double v : a.flat()) {
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
  }
  CHECK_THROWS(calibrate_threshold(topo, senses, nullptr, p, scale, FadingModel::none, 1, 1e-6, 0, 1));
}

TEST_CASE("decide") {
  Array2D<double> w(1, 3), lambda(1, 3, 0.5);
  w(0, 0) = 0.5;
  w(0, 1) = 0.0;
  w(0, 2) = 0.9;
  const auto d = decide(w, lambda);
  CHECK(d(0, 0) == Verdict::busy);
  CHECK(d(0, 1) == Verdict::available);
  CHECK(d(0, 2) == Verdict::busy);

  SensingMask only_first(1, 3, 0);
  only_first(0, 0) = 1;
  const auto partial = decide(w, lambda, &only_first);
  CHECK(partial(0, 0) == Verdict::busy);
  CHECK(partial(0, 1) == Verdict::none);

  // Raising a weight never turns busy into available.
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    Array2D<double> ww(2, 2), ll(2, 2);
    for (auto& v : ww.flat()) v = rng.uniform();
    for (auto& v : ll.flat()) v = rng.uniform();
    const auto before = decide(ww, ll);
    ww(1, 1) += rng.uniform();
    const auto after = decide(ww, ll);
    if (before(1, 1) == Verdict::busy) CHECK(after(1, 1) == Verdict::busy);
  }
}

TEST_CASE("energetic channels end above quiet ones") {
  // Reduced-size version of the discriminability property.
  const auto topo = build_grid_topology(1, 100.0, 100.0, 10.0);
  const DetectorScale scale{InputScale::log, 1e-6, 1e-9};
  const DiffusionParams p;
  double hot = 0.0, quiet = 0.0;
  const int runs = 40;
  for (int r = 0; r < runs; ++r) {
    Rng rng(static_cast<std::uint64_t>(r + 1));
    InputFrame y(1, 2, static_cast<std::size_t>(p.iterations));
    for (std::size_t i = 0; i < y.dim2(); ++i) {
      y(0, 0, i) = scale(1e-9 + rng.exponential() * (10e-6 - 1e-9));
      y(0, 1, i) = scale(1e-9 * (1.0 + 0.1 * rng.exponential()));
    }
    const auto s = run_diffusion(y, topo, full_sensing_mask(1, 2), nullptr, p);
    hot += s.w(0, 0);
    quiet += s.w(0, 1);
  }
  CHECK(hot / runs > quiet / runs);
}

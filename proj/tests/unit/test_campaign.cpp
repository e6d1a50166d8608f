#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "specsense/campaign.hpp"
#include "specsense/error.hpp"

using namespace specsense;
namespace fs = std::filesystem;

namespace {

Scenario tiny_scenario() {
  return generate_scenario("small-grid", R"({
    "topology": {"side_count": 3},
    "incumbents": {"kind": "random", "count": 4},
    "sensing": {"iterations": 40, "calibration_runs": 2},
    "devices": {"count": 60},
    "seed": 5})");
}

Campaign tiny_campaign() {
  Campaign c;
  c.scenario = tiny_scenario();
  c.thresholds_dbm = {-80.0, -70.0, -60.0};
  c.realizations = 3;
  c.seed = 5;
  return c;
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("specsense_unit_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("campaign output shape and genie sanity") {
  const auto c = tiny_campaign();
  const auto result = run_campaign(c);
  CHECK(result.summaries.size() == 6 * 3 * 5);
  CHECK(result.realizations.size() == 3);
  CHECK(result.footprint.size() == 6 * 9 * 4);
  CHECK(count_lines(results_csv(result)) == 1 + 6 * 3 * 5);
  CHECK(results_csv(result).rfind("scheme,threshold_dbm,metric,mean,std,realizations\n", 0) == 0);

  for (const auto& s : result.summaries) {
    if (s.scheme != SchemeId::genie) continue;
    switch (s.metric) {
      case Metric::utilization_ratio:
        if (s.stats.count() > 0) CHECK(s.stats.mean() == 1.0);
        break;
      case Metric::misdetection_probability:
        if (s.stats.count() > 0) CHECK(s.stats.mean() == 0.0);
        break;
      case Metric::correct_pct_all:
      case Metric::correct_pct_own:
        CHECK(s.stats.count() == 3);
        CHECK(s.stats.mean() == 100.0);
        break;
      case Metric::scheduled_devices:
        CHECK(s.stats.count() == 3);
        break;
    }
  }
  for (const auto& s : result.summaries) {
    if (s.metric == Metric::utilization_ratio || s.metric == Metric::misdetection_probability) {
      if (s.stats.count() == 0) continue;
      CHECK(s.stats.mean() >= 0.0);
      CHECK(s.stats.mean() <= 1.0);
    }
  }
}

TEST_CASE("campaigns are reproducible and independent of worker count") {
  auto c = tiny_campaign();
  const auto a = run_campaign(c);
  const auto b = run_campaign(c);
  CHECK(results_csv(a) == results_csv(b));
  CHECK(realizations_csv(a) == realizations_csv(b));
  CHECK(footprint_csv(a) == footprint_csv(b));
  c.workers = 2;
  const auto threaded = run_campaign(c);
  CHECK(results_csv(threaded) == results_csv(a));
  CHECK(summary_json(threaded) == summary_json(a));
  c.workers = 1;
  c.seed = 6;
  CHECK(results_csv(run_campaign(c)) != results_csv(a));
}

TEST_CASE("a serialized scenario reproduces the same campaign") {
  auto c = tiny_campaign();
  const auto direct = run_campaign(c);
  c.scenario = scenario_from_json(scenario_to_json(c.scenario));
  CHECK(results_csv(run_campaign(c)) == results_csv(direct));
}

TEST_CASE("every scheme sees the same measurements") {
  auto c = tiny_campaign();
  const auto all = run_campaign(c);
  c.schemes = {SchemeId::genie};
  const auto genie_only = run_campaign(c);
  REQUIRE(all.realizations.size() == genie_only.realizations.size());
  for (std::size_t r = 0; r < all.realizations.size(); ++r)
    CHECK(all.realizations[r].frame_checksum == genie_only.realizations[r].frame_checksum);

  // Dropping schemes leaves the remaining rows unchanged.
  c.schemes = {SchemeId::centralized, SchemeId::noncoop_multiband};
  const auto pair = run_campaign(c);
  const auto one = run_realization(c, 1);
  c.schemes = {SchemeId::centralized};
  const auto alone = run_realization(c, 1);
  for (std::size_t i = 0; i < 3 * 5; ++i) CHECK(one.values[i] == alone.values[i]);
  CHECK(pair.summaries.size() == 2 * 3 * 5);
}

TEST_CASE("campaign validation") {
  auto c = tiny_campaign();
  c.realizations = 0;
  CHECK_THROWS_AS(run_campaign(c), ConfigError);
  c = tiny_campaign();
  c.thresholds_dbm.clear();
  CHECK_THROWS_AS(run_campaign(c), ConfigError);
}

TEST_CASE("written results feed the plot exporter") {
  auto c = tiny_campaign();
  c.realizations = 2;
  const auto dir = scratch_dir("plots");
  write_campaign(run_campaign(c), dir.string());
  for (const char* f : {"results.csv", "realizations.csv", "footprint.csv", "summary.json"})
    CHECK(fs::exists(dir / f));

  const auto util = emit_plot_data(dir.string(), "utilization-vs-threshold");
  CHECK(util.rfind("scheme,series,threshold_dbm,mean,std,realizations\n", 0) == 0);
  CHECK(count_lines(util) == 1 + 6 * 3);
  CHECK(count_lines(emit_plot_data(dir.string(), "misdetection-vs-threshold")) == 1 + 6 * 3);
  CHECK(count_lines(emit_plot_data(dir.string(), "correct-vs-threshold")) == 1 + 2 * 6 * 3);
  CHECK(count_lines(emit_plot_data(dir.string(), "scheduled-devices")) == 1 + 6 * 3);

  const auto snap = emit_plot_data(dir.string(), "footprint-snapshot");
  CHECK(snap.rfind("k,x,y,m,energy_dbm,decision\n", 0) == 0);
  CHECK(count_lines(snap) == 1 + 9 * 4);
  PlotOptions genie_opts{std::string("genie"), -80.0};
  CHECK(count_lines(emit_plot_data(dir.string(), "footprint-snapshot", genie_opts)) == 1 + 9 * 4);

  CHECK_THROWS_AS(emit_plot_data(dir.string(), "pie-chart"), ConfigError);
  PlotOptions bad{std::string("genie"), -52.0};
  CHECK_THROWS_AS(emit_plot_data(dir.string(), "footprint-snapshot", bad), ConfigError);

  const auto empty = scratch_dir("empty");
  fs::create_directories(empty);
  CHECK_THROWS_AS(emit_plot_data(empty.string(), "utilization-vs-threshold"), ConfigError);
  std::ofstream(empty / "results.csv") << "scheme,threshold_dbm,metric,mean,std,realizations\n";
  CHECK_THROWS_AS(emit_plot_data(empty.string(), "utilization-vs-threshold"), ConfigError);

  // Rewriting the same campaign gives byte-identical files.
  const auto dir2 = scratch_dir("plots2");
  write_campaign(run_campaign(c), dir2.string());
  CHECK(slurp(dir / "results.csv") == slurp(dir2 / "results.csv"));
  fs::remove_all(dir);
  fs::remove_all(dir2);
  fs::remove_all(empty);
}

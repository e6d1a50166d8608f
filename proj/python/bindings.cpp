#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "specsense/baselines.hpp"
#include "specsense/campaign.hpp"
#include "specsense/core_model.hpp"
#include "specsense/diffusion.hpp"
#include "specsense/error.hpp"
#include "specsense/propagation.hpp"
#include "specsense/scenario.hpp"
#include "specsense/scheduler.hpp"

namespace py = pybind11;
using namespace specsense;

namespace {

using Costs = py::array_t<double, py::array::c_style | py::array::forcecast>;

CostTensor to_costs(const Costs& c) {
  if (c.ndim() != 3 || c.shape(0) != c.shape(1))
    throw std::invalid_argument("cost must have shape (K, K, L)");
  const auto K = static_cast<int>(c.shape(0));
  const auto L = static_cast<int>(c.shape(2));
  CostTensor out(K, K > 0 ? L : 0);
  auto v = c.unchecked<3>();
  for (int j = 0; j < K; ++j)
    for (int k = 0; k < K; ++k)
      for (int l = 0; l < L; ++l) out(j, k, l) = v(j, k, l);
  return out;
}

py::tuple to_tuple(const ScheduleResult& r) {
  const auto labels = r.assignment.labels();
  return py::make_tuple(std::vector<int>(labels.begin(), labels.end()), r.objective);
}

std::vector<Point2> to_points(const std::vector<std::pair<double, double>>& xy) {
  std::vector<Point2> pts;
  pts.reserve(xy.size());
  for (const auto& [x, y] : xy) pts.push_back({x, y});
  return pts;
}

CampaignResult campaign_from(const std::string& scenario_json, std::vector<double> thresholds,
                             int realizations, std::uint64_t seed, const std::string& schemes,
                             int workers) {
  Campaign c;
  c.scenario = scenario_from_json(scenario_json);
  c.schemes = parse_scheme_list(schemes);
  c.thresholds_dbm = thresholds.empty() ? default_thresholds_dbm() : std::move(thresholds);
  c.realizations = realizations;
  c.seed = seed;
  c.workers = workers;
  py::gil_scoped_release release;
  return run_campaign(c);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Distributed wideband spectrum sensing simulator.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ValueError);
  py::register_exception<SolverLimitError>(m, "SolverLimitError", PyExc_ValueError);

  m.def("generate_scenario", [](const std::string& name, const std::string& overrides) {
    return scenario_to_json(generate_scenario(name, overrides));
  }, py::arg("template"), py::arg("overrides") = "",
        "Scenario JSON from a named template with an optional JSON merge patch.");
  m.def("normalize_scenario", [](const std::string& text) {
    return scenario_to_json(scenario_from_json(text));
  }, py::arg("scenario_json"), "Parse, validate and re-serialize a scenario.");

  m.def("spectrum_plan", [](double B, double b, int p, int saps) {
    const auto plan = build_spectrum_plan(B, b, p, saps, QuotaPolicy::uniform());
    py::dict d;
    d["channel_count"] = plan.channel_count;
    d["subset_count"] = plan.subset_count;
    d["subset_quota"] = plan.subset_quota;
    d["channel_subset"] = plan.channel_subset;
    return d;
  }, py::arg("total_bandwidth_hz"), py::arg("channel_bandwidth_hz"),
        py::arg("channels_per_subset"), py::arg("sap_count"));

  m.def("grid_neighborhoods", [](int side, double spacing, double radius) {
    const auto t = build_grid_topology(side, spacing, radius, 10.0);
    std::vector<std::vector<int>> out;
    for (int k = 0; k < t.size(); ++k) {
      const auto n = t.neighbors(k);
      out.emplace_back(n.begin(), n.end());
    }
    return out;
  }, py::arg("side_count"), py::arg("spacing_m"), py::arg("radius_m"));

  m.def("pathloss_db", &pathloss_db, py::arg("distance_3d_m"), py::arg("carrier_hz"),
        py::arg("los"), py::arg("ut_height_m") = 1.5);
  m.def("los_probability", &los_probability, py::arg("distance_2d_m"));
  m.def("noise_power_mw", &noise_power_mw, py::arg("bandwidth_hz"),
        py::arg("noise_figure_db") = 7.0);

  m.def("solve_exact", [](const Costs& cost, const std::vector<int>& quota) {
    const auto c = to_costs(cost);
    ScheduleResult r;
    {
      py::gil_scoped_release release;
      r = solve_exact(c, quota);
    }
    return to_tuple(r);
  }, py::arg("cost"), py::arg("quota"),
        "Exact min-max assignment; returns (labels, objective).");
  m.def("heuristic_assign", [](const std::vector<std::pair<double, double>>& positions,
                               const Costs& cost, const std::vector<int>& quota, int restarts,
                               std::uint64_t seed, double radius_m) {
    const auto pts = to_points(positions);
    const auto topo = build_explicit_topology(pts, radius_m, 10.0);
    return to_tuple(heuristic_assign(topo, to_costs(cost), quota, restarts, seed));
  }, py::arg("positions"), py::arg("cost"), py::arg("quota"), py::arg("restarts") = 8,
        py::arg("seed") = 1, py::arg("radius_m") = 200.0,
        "Clustering heuristic; returns (labels, objective).");
  m.def("objective_value", [](const std::vector<int>& labels, const Costs& cost,
                              const std::vector<int>& quota) {
    const auto c = to_costs(cost);
    return objective_value(Assignment(labels, c.subset_count()), c, quota);
  }, py::arg("labels"), py::arg("cost"), py::arg("quota"));
  m.def("pick_min_cost_sap", [](const std::vector<int>& cluster, const Costs& cost, int subset) {
    return pick_min_cost_sap(cluster, to_costs(cost), subset);
  }, py::arg("cluster"), py::arg("cost"), py::arg("subset"));
  m.def("gap_benchmark", [](const std::vector<int>& sizes, int instances, int subsets,
                            int restarts, std::uint64_t seed) {
    std::vector<GapPoint> pts;
    {
      py::gil_scoped_release release;
      pts = gap_benchmark(sizes, instances, subsets, restarts, seed);
    }
    py::list out;
    for (const auto& p : pts) {
      py::dict d;
      d["sap_count"] = p.sap_count;
      d["mean_gap"] = p.mean_gap;
      d["std_gap"] = p.std_gap;
      d["instances"] = p.instances;
      out.append(d);
    }
    return out;
  }, py::arg("sizes"), py::arg("instances") = 50, py::arg("subsets") = 4,
        py::arg("restarts") = 8, py::arg("seed") = 1);

  m.def("alpha_weights", [](double w_self, double step_size, double gamma,
                            const std::vector<double>& neighbors, double epsilon_guard) {
    return alpha_weights(w_self, step_size, gamma, neighbors, epsilon_guard);
  }, py::arg("w_self"), py::arg("step_size"), py::arg("gamma"), py::arg("neighbor_w"),
        py::arg("epsilon_guard") = 1e-12);
  m.def("beta_weights", [](const std::vector<double>& powers) { return beta_weights(powers); },
        py::arg("reference_powers"));

  m.def("run_campaign", [](const std::string& scenario_json, std::vector<double> thresholds,
                           int realizations, std::uint64_t seed, const std::string& schemes,
                           int workers) {
    const auto res = campaign_from(scenario_json, std::move(thresholds), realizations, seed,
                                   schemes, workers);
    py::dict d;
    d["results_csv"] = results_csv(res);
    d["realizations_csv"] = realizations_csv(res);
    d["summary_json"] = summary_json(res);
    return d;
  }, py::arg("scenario_json"), py::arg("thresholds_dbm") = std::vector<double>{},
        py::arg("realizations") = 1, py::arg("seed") = 1, py::arg("schemes") = "all",
        py::arg("workers") = 1,
        "Monte-Carlo campaign; returns the CSV/JSON outputs as strings.");
  m.def("write_campaign", [](const std::string& scenario_json, const std::string& out_dir,
                             std::vector<double> thresholds, int realizations,
                             std::uint64_t seed, const std::string& schemes, int workers) {
    write_campaign(campaign_from(scenario_json, std::move(thresholds), realizations, seed,
                                 schemes, workers),
                   out_dir);
  }, py::arg("scenario_json"), py::arg("out_dir"),
        py::arg("thresholds_dbm") = std::vector<double>{}, py::arg("realizations") = 1,
        py::arg("seed") = 1, py::arg("schemes") = "all", py::arg("workers") = 1);
  m.def("emit_plot_data", [](const std::string& dir, const std::string& figure) {
    return emit_plot_data(dir, figure);
  }, py::arg("results_dir"), py::arg("figure"));
}

// Command-line front end: scenario generation, sensing assignment,
// Monte-Carlo campaigns, scheduler gap benchmark and plot data export.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specsense/campaign.hpp"
#include "specsense/error.hpp"
#include "specsense/scheduler.hpp"

namespace {

using namespace specsense;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + text + "'");
  }
  if (used != text.size()) throw ConfigError("not a number: '" + text + "'");
  return v;
}

// "a,b,c" or "start:stop:step" (inclusive).
std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw ConfigError("range must be start:stop:step");
    const double start = parse_number(parts[0]);
    const double stop = parse_number(parts[1]);
    const double step = parse_number(parts[2]);
    if (!(step > 0.0) || stop < start) throw ConfigError("range needs step > 0 and stop >= start");
    for (int n = 0; start + n * step <= stop + 1e-9; ++n) out.push_back(start + n * step);
  } else {
    for (const auto& s : split_list(text)) out.push_back(parse_number(s));
  }
  if (out.empty()) throw ConfigError("threshold list is empty");
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& s : split_list(text)) {
    const double v = parse_number(s);
    if (v != static_cast<int>(v)) throw ConfigError("not an integer: '" + s + "'");
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw ConfigError("empty integer list");
  return out;
}

void write_output(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << body;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed wideband spectrum sensing simulator"};
  app.require_subcommand(1);

  // generate-scenario
  std::string tmpl = "small-grid";
  std::string overrides;
  std::string scenario_out;
  auto* gen = app.add_subcommand("generate-scenario", "Write a scenario JSON from a template");
  gen->add_option("--template", tmpl, "small-grid | large-synthetic | large-synthetic-ltem")
      ->capture_default_str();
  gen->add_option("--set", overrides, "JSON merge patch applied to the template");
  gen->add_option("--out", scenario_out, "Output file (stdout when omitted)");

  // assign
  std::string assign_scenario;
  std::string cost_mode = "inverse-power";
  int assign_restarts = 0;
  bool assign_exact = false;
  std::string assign_out;
  auto* assign = app.add_subcommand("assign", "Compute a sensing assignment for a scenario");
  assign->add_option("--scenario", assign_scenario, "Scenario JSON")->required();
  assign->add_option("--costs", cost_mode, "inverse-power | uniform")->capture_default_str();
  assign->add_option("--restarts", assign_restarts, "Heuristic restarts (scenario value if 0)");
  assign->add_flag("--exact", assign_exact, "Use the exact solver (K <= 20)");
  assign->add_option("--out", assign_out, "Output CSV (stdout when omitted)");

  // simulate
  std::string sim_scenario;
  int realizations = 1;
  std::optional<std::uint64_t> sim_seed;
  std::string schemes = "all";
  std::string thresholds = "-82:-52:2";
  int workers = 1;
  std::string out_dir = "results";
  bool raw_energy = false;
  bool no_footprint = false;
  auto* sim = app.add_subcommand("simulate", "Run a Monte-Carlo campaign");
  sim->add_option("--scenario", sim_scenario, "Scenario JSON")->required();
  sim->add_option("--realizations", realizations, "Number of realizations")->capture_default_str();
  sim->add_option("--seed", sim_seed, "Master seed (scenario seed when omitted)");
  sim->add_option("--schemes", schemes, "Comma-separated scheme names or 'all'")
      ->capture_default_str();
  sim->add_option("--thresholds-dbm", thresholds, "List a,b,c or range start:stop:step")
      ->capture_default_str();
  sim->add_option("--workers", workers, "Concurrent realizations")->capture_default_str();
  sim->add_option("--out", out_dir, "Output directory")->capture_default_str();
  sim->add_flag("--noncoop-raw-energy", raw_energy,
                "Non-cooperative schemes use a plain energy detector");
  sim->add_flag("--no-footprint", no_footprint, "Skip footprint.csv");

  // gap-benchmark
  std::string sizes = "8,12,16,20";
  int instances = 50;
  int subsets = 4;
  int gap_restarts = 8;
  std::uint64_t gap_seed = 1;
  std::string gap_out;
  auto* gap = app.add_subcommand("gap-benchmark", "Heuristic vs exact scheduler gap");
  gap->add_option("--sizes", sizes, "SAP counts")->capture_default_str();
  gap->add_option("--instances", instances, "Instances per size")->capture_default_str();
  gap->add_option("--subsets", subsets, "Number of subsets L")->capture_default_str();
  gap->add_option("--restarts", gap_restarts, "Heuristic restarts")->capture_default_str();
  gap->add_option("--seed", gap_seed, "Seed")->capture_default_str();
  gap->add_option("--out", gap_out, "Output CSV (stdout when omitted)");

  // emit-plot-data
  std::string results_dir = "results";
  std::string figure;
  std::optional<std::string> plot_scheme;
  std::optional<double> plot_threshold;
  std::string plot_out;
  auto* plot = app.add_subcommand("emit-plot-data", "Export tidy CSV for one figure");
  plot->add_option("--results", results_dir, "Campaign output directory")->capture_default_str();
  plot->add_option("--figure", figure,
                   "utilization-vs-threshold | misdetection-vs-threshold | correct-vs-threshold | "
                   "scheduled-devices | footprint-snapshot")
      ->required();
  plot->add_option("--scheme", plot_scheme, "Scheme for footprint-snapshot");
  plot->add_option("--threshold-dbm", plot_threshold, "Threshold for footprint-snapshot");
  plot->add_option("--out", plot_out, "Output CSV (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto scenario = generate_scenario(tmpl, overrides);
      write_output(scenario_out, scenario_to_json(scenario));
    } else if (*assign) {
      const auto scenario = load_scenario(assign_scenario);
      const auto topology = build_topology(scenario);
      const auto plan = build_plan(scenario, topology.size());
      CostTensor cost;
      if (cost_mode == "inverse-power") {
        Rng rng = Rng::substream(scenario.seed, Stream::reference_links);
        const auto powers = generate_reference_powers(topology, scenario.propagation, rng);
        cost = build_inverse_power_costs(topology, powers, plan.subset_count);
      } else if (cost_mode == "uniform") {
        Rng rng = Rng::substream(scenario.seed, Stream::cost_noise);
        cost = build_uniform_costs(topology.size(), plan.subset_count, 0.0, 1000.0, rng);
      } else {
        throw ConfigError("unknown cost mode '" + cost_mode + "'");
      }
      const int restarts =
          assign_restarts > 0 ? assign_restarts : scenario.sensing.scheduler_restarts;
      const auto result =
          assign_exact ? solve_exact(cost, plan.subset_quota)
                       : heuristic_assign(topology, cost, plan.subset_quota, restarts,
                                          Rng::substream(scenario.seed, Stream::restarts).next());
      std::string body = "k,l\n";
      for (int k = 0; k < result.assignment.sap_count(); ++k)
        body += std::to_string(k) + "," + std::to_string(result.assignment.subset_of(k)) + "\n";
      char buf[64];
      std::snprintf(buf, sizeof buf, "# objective=%.10g\n", result.objective);
      write_output(assign_out, body + buf);
    } else if (*sim) {
      Campaign campaign;
      campaign.scenario = load_scenario(sim_scenario);
      campaign.scenario.sensing.noncoop_raw_energy =
          campaign.scenario.sensing.noncoop_raw_energy || raw_energy;
      campaign.seed = sim_seed.value_or(campaign.scenario.seed);
      campaign.schemes = parse_scheme_list(schemes);
      campaign.thresholds_dbm = parse_thresholds(thresholds);
      campaign.realizations = realizations;
      campaign.workers = workers;
      campaign.footprint = !no_footprint;
      write_campaign(run_campaign(campaign), out_dir);
    } else if (*gap) {
      const auto size_list = parse_int_list(sizes);
      const auto points = gap_benchmark(size_list, instances, subsets, gap_restarts, gap_seed);
      std::string body = "K,mean_gap,std\n";
      char buf[96];
      for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g\n", p.sap_count, p.mean_gap, p.std_gap);
        body += buf;
      }
      write_output(gap_out, body);
    } else if (*plot) {
      write_output(plot_out, emit_plot_data(results_dir, figure, {plot_scheme, plot_threshold}));
    }
  } catch (const ConfigError& e) {
    std::cerr << "specsense: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "specsense: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

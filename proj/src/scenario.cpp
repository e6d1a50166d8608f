#include "specsense/scenario.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "specsense/error.hpp"

namespace specsense {

using nlohmann::json;

namespace {

constexpr double kBandSlackHz = 1e-3;

void reject_unknown(const json& obj, std::string_view where,
                    std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + std::string(where));
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename T>
T require(const json& obj, const char* key) {
  if (!obj.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  return get_or<T>(obj, key, T{});
}

json rect_to_json(const Rect& r) {
  return {{"x_min", r.x_min}, {"y_min", r.y_min}, {"x_max", r.x_max}, {"y_max", r.y_max}};
}

Rect rect_from_json(const json& j) {
  reject_unknown(j, "region", {"x_min", "y_min", "x_max", "y_max"});
  Rect r{require<double>(j, "x_min"), require<double>(j, "y_min"), require<double>(j, "x_max"),
         require<double>(j, "y_max")};
  if (!(r.x_max >= r.x_min && r.y_max >= r.y_min)) throw ConfigError("region has negative extent");
  return r;
}

json topology_to_json(const TopologySpec& t) {
  json j;
  switch (t.kind) {
    case TopologySpec::Kind::grid:
      j = {{"kind", "grid"}, {"side_count", t.side_count}, {"spacing_m", t.spacing_m}};
      break;
    case TopologySpec::Kind::random:
      j = {{"kind", "random"}, {"count", t.count}, {"region", rect_to_json(t.region)}};
      break;
    case TopologySpec::Kind::explicit_positions: {
      json pts = json::array();
      for (const auto& p : t.positions) pts.push_back({p.x, p.y});
      j = {{"kind", "explicit"}, {"positions", pts}};
      break;
    }
  }
  j["radius_m"] = t.radius_m;
  j["height_m"] = t.height_m;
  return j;
}

TopologySpec topology_from_json(const json& j) {
  TopologySpec t;
  const auto kind = require<std::string>(j, "kind");
  if (kind == "grid") {
    reject_unknown(j, "topology", {"kind", "side_count", "spacing_m", "radius_m", "height_m"});
    t.kind = TopologySpec::Kind::grid;
    t.side_count = require<int>(j, "side_count");
    t.spacing_m = require<double>(j, "spacing_m");
  } else if (kind == "random") {
    reject_unknown(j, "topology", {"kind", "count", "region", "radius_m", "height_m"});
    t.kind = TopologySpec::Kind::random;
    t.count = require<int>(j, "count");
    t.region = rect_from_json(require<json>(j, "region"));
  } else if (kind == "explicit") {
    reject_unknown(j, "topology", {"kind", "positions", "radius_m", "height_m"});
    t.kind = TopologySpec::Kind::explicit_positions;
    for (const auto& p : require<json>(j, "positions")) {
      if (!p.is_array() || p.size() != 2) throw ConfigError("positions must be [x, y] pairs");
      t.positions.push_back({p[0].get<double>(), p[1].get<double>()});
    }
  } else {
    throw ConfigError("unknown topology kind '" + kind + "'");
  }
  t.radius_m = require<double>(j, "radius_m");
  t.height_m = get_or<double>(j, "height_m", 10.0);
  return t;
}

json spectrum_to_json(const SpectrumSpec& s) {
  json q = s.quota.kind == QuotaPolicy::Kind::uniform ? json("uniform") : json(s.quota.quota);
  return {{"B_hz", s.total_bandwidth_hz},        {"b_hz", s.channel_bandwidth_hz},
          {"p", s.channels_per_subset},          {"quota", q},
          {"center_hz", s.center_frequency_hz}};
}

SpectrumSpec spectrum_from_json(const json& j) {
  reject_unknown(j, "spectrum", {"B_hz", "b_hz", "p", "quota", "center_hz"});
  SpectrumSpec s;
  s.total_bandwidth_hz = require<double>(j, "B_hz");
  s.channel_bandwidth_hz = require<double>(j, "b_hz");
  s.channels_per_subset = get_or<int>(j, "p", 1);
  s.center_frequency_hz = get_or<double>(j, "center_hz", 5.43e9);
  const auto q = get_or<json>(j, "quota", json("uniform"));
  if (q.is_string()) {
    if (q.get<std::string>() != "uniform") throw ConfigError("quota must be \"uniform\" or a list");
    s.quota = QuotaPolicy::uniform();
  } else {
    s.quota = QuotaPolicy::fixed(q.get<std::vector<int>>());
  }
  return s;
}

json incumbent_to_json(const Incumbent& inc) {
  return {{"x", inc.position.x},
          {"y", inc.position.y},
          {"height_m", inc.height_m},
          {"tx_power_dbm", inc.tx_power_dbm},
          {"center_hz", inc.signal_center_hz},
          {"bandwidth_hz", inc.signal_bandwidth_hz}};
}

Incumbent incumbent_from_json(const json& j) {
  reject_unknown(j, "incumbent", {"x", "y", "height_m", "tx_power_dbm", "center_hz", "bandwidth_hz"});
  Incumbent inc;
  inc.position = {require<double>(j, "x"), require<double>(j, "y")};
  inc.height_m = get_or<double>(j, "height_m", 10.0);
  inc.tx_power_dbm = get_or<double>(j, "tx_power_dbm", 30.0);
  inc.signal_center_hz = require<double>(j, "center_hz");
  inc.signal_bandwidth_hz = get_or<double>(j, "bandwidth_hz", 20e6);
  if (!std::isfinite(inc.tx_power_dbm)) throw ConfigError("incumbent tx power must be finite");
  if (!(inc.signal_bandwidth_hz > 0.0)) throw ConfigError("incumbent bandwidth must be > 0");
  return inc;
}

json incumbents_to_json(const IncumbentSpec& s) {
  if (s.kind == IncumbentSpec::Kind::fixed) {
    json arr = json::array();
    for (const auto& inc : s.fixed) arr.push_back(incumbent_to_json(inc));
    return arr;
  }
  json j = {{"kind", "random"},
            {"count", s.count},
            {"tx_power_dbm", s.tx_power_dbm},
            {"height_m", s.height_m},
            {"bandwidths_hz", s.bandwidths_hz},
            {"placement", s.placement == IncumbentSpec::Placement::channel ? "channel" : "uniform"}};
  if (s.region) j["region"] = rect_to_json(*s.region);
  return j;
}

IncumbentSpec incumbents_from_json(const json& j) {
  IncumbentSpec s;
  if (j.is_array()) {
    s.kind = IncumbentSpec::Kind::fixed;
    for (const auto& e : j) s.fixed.push_back(incumbent_from_json(e));
    return s;
  }
  reject_unknown(j, "incumbents",
                 {"kind", "count", "tx_power_dbm", "height_m", "bandwidths_hz", "placement", "region"});
  if (get_or<std::string>(j, "kind", "random") != "random")
    throw ConfigError("incumbents object must have kind \"random\"");
  s.kind = IncumbentSpec::Kind::random;
  s.count = require<int>(j, "count");
  s.tx_power_dbm = get_or<double>(j, "tx_power_dbm", 30.0);
  s.height_m = get_or<double>(j, "height_m", 10.0);
  s.bandwidths_hz = get_or<std::vector<double>>(j, "bandwidths_hz", {20e6});
  const auto placement = get_or<std::string>(j, "placement", "channel");
  if (placement == "channel") {
    s.placement = IncumbentSpec::Placement::channel;
  } else if (placement == "uniform") {
    s.placement = IncumbentSpec::Placement::uniform;
  } else {
    throw ConfigError("unknown incumbent placement '" + placement + "'");
  }
  if (j.contains("region")) s.region = rect_from_json(j["region"]);
  if (s.count < 0) throw ConfigError("incumbent count must be >= 0");
  if (s.bandwidths_hz.empty()) throw ConfigError("bandwidths_hz must not be empty");
  return s;
}

json propagation_to_json(const PropagationParams& p) {
  return {{"model", p.model == PathlossModel::umi ? "umi" : "free-space"},
          {"carrier_hz", p.carrier_hz},
          {"sigma_los_db", p.shadowing_sigma_los_db},
          {"sigma_nlos_db", p.shadowing_sigma_nlos_db},
          {"fading", p.fading == FadingModel::rayleigh ? "rayleigh" : "none"},
          {"fading_block_iterations", p.fading_block_iterations},
          {"noise_figure_db", p.noise_figure_db},
          {"sap_reference_power_dbm", p.sap_reference_power_dbm}};
}

PropagationParams propagation_from_json(const json& j) {
  reject_unknown(j, "propagation",
                 {"model", "carrier_hz", "sigma_los_db", "sigma_nlos_db", "fading",
                  "fading_block_iterations", "noise_figure_db", "sap_reference_power_dbm"});
  PropagationParams p;
  const auto model = get_or<std::string>(j, "model", "umi");
  if (model == "umi") {
    p.model = PathlossModel::umi;
  } else if (model == "free-space") {
    p.model = PathlossModel::free_space;
  } else {
    throw ConfigError("unknown pathloss model '" + model + "'");
  }
  p.carrier_hz = get_or<double>(j, "carrier_hz", p.carrier_hz);
  p.shadowing_sigma_los_db = get_or<double>(j, "sigma_los_db", p.shadowing_sigma_los_db);
  p.shadowing_sigma_nlos_db = get_or<double>(j, "sigma_nlos_db", p.shadowing_sigma_nlos_db);
  const auto fading = get_or<std::string>(j, "fading", "rayleigh");
  if (fading == "rayleigh") {
    p.fading = FadingModel::rayleigh;
  } else if (fading == "none") {
    p.fading = FadingModel::none;
  } else {
    throw ConfigError("unknown fading model '" + fading + "'");
  }
  p.fading_block_iterations = get_or<int>(j, "fading_block_iterations", p.fading_block_iterations);
  p.noise_figure_db = get_or<double>(j, "noise_figure_db", p.noise_figure_db);
  p.sap_reference_power_dbm = get_or<double>(j, "sap_reference_power_dbm", p.sap_reference_power_dbm);
  if (p.shadowing_sigma_los_db < 0.0 || p.shadowing_sigma_nlos_db < 0.0)
    throw ConfigError("shadowing sigmas must be >= 0");
  if (p.fading_block_iterations < 1) throw ConfigError("fading_block_iterations must be >= 1");
  return p;
}

json sensing_to_json(const SensingSpec& s) {
  const auto& d = s.diffusion;
  return {{"step_size", d.step_size},
          {"smoothing", d.smoothing},
          {"iterations", d.iterations},
          {"epsilon_guard", d.epsilon_guard},
          {"initial_weight", d.initial_weight},
          {"input_scale", d.input_scale == InputScale::log ? "log" : "linear"},
          {"beta_set", d.beta_set == BetaSet::informative ? "informative" : "all-neighbors"},
          {"input_reference_dbm_per_20mhz", s.input_reference_dbm_per_20mhz},
          {"calibration_runs", s.calibration_runs},
          {"calibration_level", s.calibration_level},
          {"scheduler_restarts", s.scheduler_restarts},
          {"noncoop_raw_energy", s.noncoop_raw_energy}};
}

SensingSpec sensing_from_json(const json& j) {
  reject_unknown(j, "sensing",
                 {"step_size", "smoothing", "iterations", "epsilon_guard", "initial_weight",
                  "input_scale", "beta_set", "input_reference_dbm_per_20mhz", "calibration_runs",
                  "calibration_level",
                  "scheduler_restarts", "noncoop_raw_energy"});
  SensingSpec s;
  auto& d = s.diffusion;
  d.step_size = get_or<double>(j, "step_size", d.step_size);
  d.smoothing = get_or<double>(j, "smoothing", d.smoothing);
  d.iterations = get_or<int>(j, "iterations", d.iterations);
  d.epsilon_guard = get_or<double>(j, "epsilon_guard", d.epsilon_guard);
  d.initial_weight = get_or<double>(j, "initial_weight", d.initial_weight);
  const auto scale = get_or<std::string>(j, "input_scale", "log");
  if (scale == "log") {
    d.input_scale = InputScale::log;
  } else if (scale == "linear") {
    d.input_scale = InputScale::linear;
  } else {
    throw ConfigError("unknown input scale '" + scale + "'");
  }
  const auto beta = get_or<std::string>(j, "beta_set", "informative");
  if (beta == "informative") {
    d.beta_set = BetaSet::informative;
  } else if (beta == "all-neighbors") {
    d.beta_set = BetaSet::all_neighbors;
  } else {
    throw ConfigError("unknown beta set '" + beta + "'");
  }
  d.validate();
  s.input_reference_dbm_per_20mhz =
      get_or<double>(j, "input_reference_dbm_per_20mhz", s.input_reference_dbm_per_20mhz);
  s.calibration_runs = get_or<int>(j, "calibration_runs", s.calibration_runs);
  s.calibration_level = get_or<double>(j, "calibration_level", s.calibration_level);
  s.scheduler_restarts = get_or<int>(j, "scheduler_restarts", s.scheduler_restarts);
  s.noncoop_raw_energy = get_or<bool>(j, "noncoop_raw_energy", s.noncoop_raw_energy);
  if (s.calibration_runs < 1) throw ConfigError("calibration_runs must be >= 1");
  if (s.scheduler_restarts < 1) throw ConfigError("scheduler_restarts must be >= 1");
  return s;
}

json scenario_to_json_value(const Scenario& s) {
  return {{"name", s.name},
          {"seed", s.seed},
          {"topology", topology_to_json(s.topology)},
          {"spectrum", spectrum_to_json(s.spectrum)},
          {"incumbents", incumbents_to_json(s.incumbents)},
          {"propagation", propagation_to_json(s.propagation)},
          {"sensing", sensing_to_json(s.sensing)},
          {"devices", {{"count", s.devices.count},
                       {"capacity_per_block", s.devices.capacity_per_block}}}};
}

Scenario scenario_from_json_value(const json& j) {
  reject_unknown(j, "scenario", {"name", "seed", "topology", "spectrum", "incumbents",
                                 "propagation", "sensing", "devices"});
  Scenario s;
  s.name = get_or<std::string>(j, "name", "custom");
  s.seed = get_or<std::uint64_t>(j, "seed", 1);
  s.topology = topology_from_json(require<json>(j, "topology"));
  s.spectrum = spectrum_from_json(require<json>(j, "spectrum"));
  s.incumbents = incumbents_from_json(get_or<json>(j, "incumbents", json::array()));
  s.propagation = propagation_from_json(get_or<json>(j, "propagation", json::object()));
  s.sensing = sensing_from_json(get_or<json>(j, "sensing", json::object()));
  const auto dev = get_or<json>(j, "devices", json::object());
  reject_unknown(dev, "devices", {"count", "capacity_per_block"});
  s.devices.count = get_or<int>(dev, "count", 0);
  s.devices.capacity_per_block = get_or<int>(dev, "capacity_per_block", 1);
  if (s.devices.count < 0) throw ConfigError("device count must be >= 0");
  if (s.devices.capacity_per_block < 1) throw ConfigError("capacity_per_block must be >= 1");
  return s;
}

Scenario small_grid_template() {
  Scenario s;
  s.name = "small-grid";
  s.topology = {};
  s.spectrum = {};
  s.incumbents.kind = IncumbentSpec::Kind::random;
  s.incumbents.count = 50;
  s.incumbents.placement = IncumbentSpec::Placement::channel;
  s.devices = {1000, 1};
  return s;
}

Scenario large_synthetic_template(double channel_bandwidth_hz, int channels_per_subset) {
  Scenario s;
  s.name = "large-synthetic";
  s.topology.kind = TopologySpec::Kind::random;
  s.topology.count = 500;
  s.topology.region = {0.0, 0.0, 5000.0, 5000.0};
  // Radius equal to the mean inter-site distance 1/sqrt(density).
  s.topology.radius_m = 224.0;
  s.spectrum.total_bandwidth_hz = 500e6;
  s.spectrum.channel_bandwidth_hz = channel_bandwidth_hz;
  s.spectrum.channels_per_subset = channels_per_subset;
  s.incumbents.kind = IncumbentSpec::Kind::random;
  s.incumbents.count = 2000;
  s.incumbents.bandwidths_hz = {20e6, 40e6, 80e6};
  s.incumbents.placement = IncumbentSpec::Placement::uniform;
  s.incumbents.region = s.topology.region;
  s.devices = {100000, 1};
  return s;
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  return scenario_from_json_value(j);
}

std::string scenario_to_json(const Scenario& scenario) {
  return scenario_to_json_value(scenario).dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write scenario file '" + path + "'");
  out << scenario_to_json(scenario);
}

Scenario generate_scenario(const std::string& template_name, const std::string& overrides) {
  Scenario base;
  if (template_name == "small-grid") {
    base = small_grid_template();
  } else if (template_name == "large-synthetic") {
    base = large_synthetic_template(180e3, 111);
  } else if (template_name == "large-synthetic-ltem") {
    base = large_synthetic_template(1.4e6, 14);
  } else {
    throw ConfigError("unknown scenario template '" + template_name + "'");
  }
  if (overrides.empty()) return base;
  json patch;
  try {
    patch = json::parse(overrides);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("overrides are not valid JSON: ") + e.what());
  }
  json j = scenario_to_json_value(base);
  j.merge_patch(patch);
  return scenario_from_json_value(j);
}

Topology build_topology(const Scenario& scenario) {
  const auto& t = scenario.topology;
  switch (t.kind) {
    case TopologySpec::Kind::grid:
      return build_grid_topology(t.side_count, t.spacing_m, t.radius_m, t.height_m);
    case TopologySpec::Kind::random: {
      Rng rng = Rng::substream(scenario.seed, Stream::placement);
      return build_random_topology(t.count, t.region, t.radius_m, t.height_m, rng);
    }
    case TopologySpec::Kind::explicit_positions:
      return build_explicit_topology(t.positions, t.radius_m, t.height_m);
  }
  throw std::logic_error("unknown topology kind");
}

SpectrumPlan build_plan(const Scenario& scenario, int sap_count) {
  const auto& s = scenario.spectrum;
  return build_spectrum_plan(s.total_bandwidth_hz, s.channel_bandwidth_hz, s.channels_per_subset,
                             sap_count, s.quota, s.center_frequency_hz);
}

DetectorScale detector_scale(const Scenario& scenario, const SpectrumPlan& plan) {
  const double b = plan.channel_bandwidth_hz;
  const double ref_dbm =
      scenario.sensing.input_reference_dbm_per_20mhz + 10.0 * std::log10(b / 20e6);
  const double noise = noise_power_mw(b, scenario.propagation.noise_figure_db);
  const DetectorScale scale{scenario.sensing.diffusion.input_scale, dbm_to_mw(ref_dbm), noise};
  if (scale.scale == InputScale::log && !(scale.reference_mw > scale.noise_mw))
    throw ConfigError("input reference must lie above the noise floor");
  return scale;
}

std::vector<Incumbent> realize_incumbents(const IncumbentSpec& spec, const SpectrumPlan& plan,
                                          const Rect& default_region, Rng& rng) {
  const double lo = plan.band_low_hz();
  const double hi = plan.band_high_hz();
  if (spec.kind == IncumbentSpec::Kind::fixed) {
    for (const auto& inc : spec.fixed) {
      const double half = inc.signal_bandwidth_hz / 2.0;
      if (inc.signal_center_hz - half < lo - kBandSlackHz ||
          inc.signal_center_hz + half > hi + kBandSlackHz)
        throw ConfigError("incumbent signal lies outside the wideband spectrum");
    }
    return spec.fixed;
  }

  std::vector<double> widths;
  for (double w : spec.bandwidths_hz)
    if (w > 0.0 && w <= plan.total_bandwidth_hz + kBandSlackHz) widths.push_back(w);
  if (widths.empty()) throw ConfigError("no incumbent bandwidth fits inside the spectrum");
  const Rect region = spec.region.value_or(default_region);

  std::vector<Incumbent> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int n = 0; n < spec.count; ++n) {
    Incumbent inc;
    inc.position = uniform_point(region, rng);
    inc.height_m = spec.height_m;
    inc.tx_power_dbm = spec.tx_power_dbm;
    inc.signal_bandwidth_hz = widths[rng.index(widths.size())];
    const double w = inc.signal_bandwidth_hz;
    if (spec.placement == IncumbentSpec::Placement::channel) {
      const auto slots = static_cast<std::uint64_t>(
          std::max(1.0, std::floor(plan.total_bandwidth_hz / w + 1e-9)));
      inc.signal_center_hz = lo + (static_cast<double>(rng.index(slots)) + 0.5) * w;
    } else {
      inc.signal_center_hz = rng.uniform(lo + w / 2.0, std::max(lo + w / 2.0, hi - w / 2.0));
    }
    out.push_back(inc);
  }
  return out;
}

std::vector<Point2> draw_devices(int count, const Rect& region, Rng& rng) {
  std::vector<Point2> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int n = 0; n < count; ++n) out.push_back(uniform_point(region, rng));
  return out;
}

}  // namespace specsense

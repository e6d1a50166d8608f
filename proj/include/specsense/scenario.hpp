#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specsense/core_model.hpp"
#include "specsense/diffusion.hpp"
#include "specsense/propagation.hpp"

namespace specsense {

struct TopologySpec {
  enum class Kind { grid, random, explicit_positions };
  Kind kind = Kind::grid;
  int side_count = 10;                  // grid
  double spacing_m = 200.0;             // grid
  int count = 0;                        // random
  Rect region;                          // random
  std::vector<Point2> positions;        // explicit
  double radius_m = 200.0;
  double height_m = 10.0;
  bool operator==(const TopologySpec&) const = default;
};

struct SpectrumSpec {
  double total_bandwidth_hz = 80e6;
  double channel_bandwidth_hz = 20e6;
  int channels_per_subset = 1;
  QuotaPolicy quota;
  double center_frequency_hz = 5.43e9;
  bool operator==(const SpectrumSpec&) const = default;
};

/// Incumbents are either a fixed list or redrawn every realization.
struct IncumbentSpec {
  enum class Kind { fixed, random };
  /// channel: the signal occupies one of the aligned slots of its own
  /// bandwidth; uniform: the center is uniform over positions keeping the
  /// signal inside the band.
  enum class Placement { channel, uniform };

  Kind kind = Kind::random;
  std::vector<Incumbent> fixed;
  int count = 50;
  double tx_power_dbm = 30.0;
  double height_m = 10.0;
  std::vector<double> bandwidths_hz{20e6};
  Placement placement = Placement::channel;
  /// Placement area; empty means the SAP bounding box.
  std::optional<Rect> region;
  bool operator==(const IncumbentSpec&) const = default;
};

struct SensingSpec {
  DiffusionParams diffusion;
  /// Fixed filter input reference, quoted per 20 MHz and scaled to the
  /// channel bandwidth.
  double input_reference_dbm_per_20mhz = -62.0;
  int calibration_runs = 20;
  /// Synthetic calibration energy as a multiple of the threshold.
  double calibration_level = 1.0;
  int scheduler_restarts = 8;
  bool noncoop_raw_energy = false;
  bool operator==(const SensingSpec&) const = default;
};

struct DeviceSpec {
  int count = 0;
  int capacity_per_block = 1;
  bool operator==(const DeviceSpec&) const = default;
};

struct Scenario {
  std::string name = "custom";
  TopologySpec topology;
  SpectrumSpec spectrum;
  IncumbentSpec incumbents;
  PropagationParams propagation;
  SensingSpec sensing;
  DeviceSpec devices;
  std::uint64_t seed = 1;
  bool operator==(const Scenario&) const = default;
};

/// Throws ConfigError on malformed or inconsistent input.
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& scenario);
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

/// "small-grid", "large-synthetic" or "large-synthetic-ltem". `overrides`
/// is a JSON merge patch applied to the template (may be empty).
Scenario generate_scenario(const std::string& template_name, const std::string& overrides = "");

/// Topology of a scenario; random placement draws from the scenario seed.
Topology build_topology(const Scenario& scenario);
SpectrumPlan build_plan(const Scenario& scenario, int sap_count);

/// Filter input mapping for a scenario's channel bandwidth.
DetectorScale detector_scale(const Scenario& scenario, const SpectrumPlan& plan);

/// Incumbents for one realization (the fixed list when kind == fixed).
std::vector<Incumbent> realize_incumbents(const IncumbentSpec& spec, const SpectrumPlan& plan,
                                          const Rect& default_region, Rng& rng);

std::vector<Point2> draw_devices(int count, const Rect& region, Rng& rng);

}  // namespace specsense

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specsense/baselines.hpp"
#include "specsense/metrics.hpp"
#include "specsense/scenario.hpp"

namespace specsense {

enum class Metric {
  utilization_ratio,
  misdetection_probability,
  correct_pct_all,
  correct_pct_own,
  scheduled_devices,
};

std::string_view metric_name(Metric metric);

struct Campaign {
  Scenario scenario;
  std::vector<SchemeId> schemes{all_schemes().begin(), all_schemes().end()};
  std::vector<double> thresholds_dbm;
  int realizations = 1;
  /// Master seed for every random draw, including SAP placement.
  std::uint64_t seed = 1;
  int workers = 1;
  /// Keep per-block decisions of realization 0 at the first threshold.
  bool footprint = true;
};

/// -82, -80, ..., -52 dBm.
std::vector<double> default_thresholds_dbm();

struct MetricSummary {
  SchemeId scheme;
  double threshold_dbm = 0.0;
  Metric metric;
  RunningStats stats;
};

struct RealizationRecord {
  int index = 0;
  std::uint64_t frame_checksum = 0;
  int incumbents = 0;
  /// Scheduler objective of the single-band assignment, when one was built.
  std::optional<double> assignment_objective;
};

struct FootprintRow {
  int k = 0;
  Point2 position;
  int m = 0;
  double energy_dbm = 0.0;
  double threshold_dbm = 0.0;
  SchemeId scheme;
  Verdict decision = Verdict::none;
};

/// Per-realization metric values before aggregation.
struct RealizationMetrics {
  RealizationRecord record;
  /// [scheme][threshold][metric] in campaign order; absent when undefined.
  std::vector<std::optional<double>> values;
  std::vector<FootprintRow> footprint;
};

struct CampaignResult {
  Campaign campaign;
  std::vector<MetricSummary> summaries;  // scheme-major, then threshold, then metric
  std::vector<RealizationRecord> realizations;
  std::vector<FootprintRow> footprint;
  /// Per-realization values in RealizationMetrics::values layout.
  std::vector<std::vector<std::optional<double>>> values;

  /// Value of one metric in realization r; scheme and threshold are
  /// positions in the campaign lists.
  std::optional<double> value(int r, std::size_t scheme, std::size_t threshold,
                              Metric metric) const;
};

/// Runs one realization of a campaign; exposed for tests that need the
/// per-realization values.
RealizationMetrics run_realization(const Campaign& campaign, int index);

/// Every realization draws incumbents, links, reference powers, fading and
/// devices from its own substreams, builds one measurement frame and feeds
/// it to every scheme at every threshold. Throws on the first failure.
CampaignResult run_campaign(const Campaign& campaign);

/// results.csv, realizations.csv, footprint.csv (if kept) and summary.json.
void write_campaign(const CampaignResult& result, const std::string& out_dir);

std::string results_csv(const CampaignResult& result);
std::string realizations_csv(const CampaignResult& result);
std::string footprint_csv(const CampaignResult& result);
std::string summary_json(const CampaignResult& result);

struct PlotOptions {
  std::optional<std::string> scheme;        // footprint-snapshot only
  std::optional<double> threshold_dbm;      // footprint-snapshot only
};

/// Tidy CSV for one figure, read from a campaign output directory.
/// Figures: utilization-vs-threshold, misdetection-vs-threshold,
/// correct-vs-threshold, scheduled-devices, footprint-snapshot. Throws
/// ConfigError on an unknown figure or missing/empty results.
std::string emit_plot_data(const std::string& results_dir, const std::string& figure,
                           const PlotOptions& options = {});

}  // namespace specsense

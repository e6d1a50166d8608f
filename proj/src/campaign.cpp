#include "specsense/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "specsense/error.hpp"
#include "specsense/log.hpp"

namespace specsense {

namespace {

constexpr int kMetricCount = 5;
constexpr Metric kMetrics[kMetricCount] = {Metric::utilization_ratio,
                                           Metric::misdetection_probability,
                                           Metric::correct_pct_all, Metric::correct_pct_own,
                                           Metric::scheduled_devices};

// Tags separating the calibration seeds of the different detectors.
constexpr std::uint64_t kCalibrateCooperative = 1;
constexpr std::uint64_t kCalibrateAlone = 2;
constexpr std::uint64_t kCalibrateSingleband = 3;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

bool uses(const Campaign& c, SchemeId id) {
  return std::find(c.schemes.begin(), c.schemes.end(), id) != c.schemes.end();
}

// Everything shared by all realizations of a campaign.
struct Prepared {
  Scenario scenario;
  Topology topology;
  SpectrumPlan plan;
  Rect region;
  DetectorScale scale;
  std::vector<double> thresholds_mw;
  bool filter_local = false;
  std::vector<Array2D<double>> lambda_cooperative;  // per threshold, full mask
  std::vector<Array2D<double>> lambda_alone;        // per threshold, self-only graph
};

double calibration_energy(const Prepared& p, std::size_t t) {
  return p.scenario.sensing.calibration_level * p.thresholds_mw[t];
}

// The same synthetic draws serve every threshold, so lambda moves
// monotonically with the threshold.
std::uint64_t calibration_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t r = 0) {
  return Rng::substream(master, Stream::calibration, tag, r).next();
}

Prepared prepare(const Campaign& campaign) {
  if (campaign.realizations < 1) throw ConfigError("realization count must be >= 1");
  if (campaign.thresholds_dbm.empty()) throw ConfigError("threshold list must not be empty");
  if (campaign.schemes.empty()) throw ConfigError("scheme list must not be empty");

  Prepared p;
  p.scenario = campaign.scenario;
  p.scenario.seed = campaign.seed;
  p.topology = build_topology(p.scenario);
  p.plan = build_plan(p.scenario, p.topology.size());
  p.region = p.scenario.topology.kind == TopologySpec::Kind::random ? p.scenario.topology.region
                                                                    : p.topology.bounding_box();
  p.scale = detector_scale(p.scenario, p.plan);
  for (double t : campaign.thresholds_dbm) p.thresholds_mw.push_back(dbm_to_mw(t));

  const auto& sensing = p.scenario.sensing;
  const auto& prop = p.scenario.propagation;
  p.filter_local = !sensing.noncoop_raw_energy &&
                   (uses(campaign, SchemeId::noncoop_multiband) ||
                    uses(campaign, SchemeId::noncoop_singleband));
  const bool cooperative = uses(campaign, SchemeId::proposed_multiband);
  const auto full = full_sensing_mask(p.topology.size(), p.plan.channel_count);
  const Topology alone = p.topology.isolated();

  for (std::size_t t = 0; t < p.thresholds_mw.size(); ++t) {
    if (cooperative)
      p.lambda_cooperative.push_back(calibrate_threshold(
          p.topology, full, nullptr, sensing.diffusion, p.scale, prop.fading,
          prop.fading_block_iterations, calibration_energy(p, t), sensing.calibration_runs,
          calibration_seed(campaign.seed, kCalibrateCooperative)));
    if (p.filter_local)
      p.lambda_alone.push_back(calibrate_threshold(
          alone, full, nullptr, sensing.diffusion, p.scale, prop.fading,
          prop.fading_block_iterations, calibration_energy(p, t), sensing.calibration_runs,
          calibration_seed(campaign.seed, kCalibrateAlone)));
  }
  return p;
}

Array2D<double> block_energy_dbm(const MeasurementFrame& frame) {
  Array2D<double> out(static_cast<std::size_t>(frame.sap_count()),
                      static_cast<std::size_t>(frame.channel_count()), 0.0);
  const int N = frame.iterations();
  for (int k = 0; k < frame.sap_count(); ++k)
    for (int m = 0; m < frame.channel_count(); ++m) {
      double sum = 0.0;
      for (int i = 0; i < N; ++i) sum += frame(k, m, i);
      out(static_cast<std::size_t>(k), static_cast<std::size_t>(m)) =
          mw_to_dbm(N > 0 ? sum / N : frame.noise_mw());
    }
  return out;
}

RealizationMetrics realize(const Prepared& p, const Campaign& campaign, int r) {
  const auto& sc = p.scenario;
  const auto& sensing = sc.sensing;
  const auto& params = sensing.diffusion;
  const auto ru = static_cast<std::uint64_t>(r);
  const std::uint64_t seed = campaign.seed;
  const int K = p.topology.size();

  Rng incumbent_rng = Rng::substream(seed, Stream::incumbents, ru);
  const auto incumbents = realize_incumbents(sc.incumbents, p.plan, p.region, incumbent_rng);
  Rng shadow_rng = Rng::substream(seed, Stream::shadowing, ru);
  const auto links = realize_links(p.topology, incumbents, sc.propagation, shadow_rng);
  Rng ref_rng = Rng::substream(seed, Stream::reference_links, ru);
  const auto powers = generate_reference_powers(p.topology, sc.propagation, ref_rng);
  Rng fading_rng = Rng::substream(seed, Stream::fading, ru);
  const auto frame = generate_measurements(p.topology, p.plan, incumbents, links, sc.propagation,
                                           params.iterations, fading_rng);
  const auto mean_energy = mean_block_energy(p.topology, p.plan, incumbents, links, p.scale.noise_mw);

  std::vector<int> attachment;
  if (sc.devices.count > 0) {
    Rng device_rng = Rng::substream(seed, Stream::devices, ru);
    attachment = attach_devices(p.topology, draw_devices(sc.devices.count, p.region, device_rng));
  }

  RealizationMetrics out;
  out.record.index = r;
  out.record.frame_checksum = frame.checksum();
  out.record.incumbents = static_cast<int>(incumbents.size());

  std::optional<SensingMask> singleband_mask;
  if (uses(campaign, SchemeId::proposed_singleband)) {
    const auto cost = build_inverse_power_costs(p.topology, powers, p.plan.subset_count);
    const auto sched =
        heuristic_assign(p.topology, cost, p.plan.subset_quota, sensing.scheduler_restarts,
                         Rng::substream(seed, Stream::restarts, ru).next());
    out.record.assignment_objective = sched.objective;
    singleband_mask = sensing_mask(sched.assignment, p.plan);
  }
  std::vector<int> picks;
  if (uses(campaign, SchemeId::noncoop_singleband)) {
    Rng pick_rng = Rng::substream(seed, Stream::singleband_pick, ru);
    picks = pick_random_subsets(K, p.plan.subset_count, pick_rng);
  }

  const auto T = p.thresholds_mw.size();
  out.values.assign(campaign.schemes.size() * T * kMetricCount, std::nullopt);
  const auto full = full_sensing_mask(K, p.plan.channel_count);
  const Array2D<double> energy_dbm = campaign.footprint && r == 0 ? block_energy_dbm(frame)
                                                                  : Array2D<double>();

  // The filters run once per realization; thresholds only move lambda.
  const bool cooperative = uses(campaign, SchemeId::proposed_multiband);
  const bool singleband = uses(campaign, SchemeId::proposed_singleband);
  const InputFrame y = cooperative || singleband || p.filter_local
                           ? normalize_measurements(frame, p.scale)
                           : InputFrame();
  const auto w_local = p.filter_local ? local_filter_weights(y, p.topology, params)
                                      : Array2D<double>();
  const auto w_cooperative =
      cooperative ? cooperative_filter_weights(y, p.topology, full, &powers, params)
                  : Array2D<double>();
  const auto w_singleband =
      singleband ? cooperative_filter_weights(y, p.topology, *singleband_mask, &powers, params)
                 : Array2D<double>();
  const auto informed = singleband
                            ? informed_blocks(p.topology, *singleband_mask, params.beta_set)
                            : SensingMask();

  for (std::size_t t = 0; t < T; ++t) {
    const double tau = p.thresholds_mw[t];
    const auto truth = compute_ground_truth(mean_energy, tau);

    std::optional<DecisionMap> local;
    auto local_decisions = [&]() -> const DecisionMap& {
      if (!local)
        local = p.filter_local ? decide(w_local, p.lambda_alone[t])
                               : noncoop_multiband_raw(frame, tau);
      return *local;
    };

    for (std::size_t s = 0; s < campaign.schemes.size(); ++s) {
      const SchemeId id = campaign.schemes[s];
      SchemeOutput result{DecisionMap(), full};
      switch (id) {
        case SchemeId::genie:
          result.decisions = genie(truth);
          break;
        case SchemeId::centralized:
          result.decisions = centralized_egc(frame, tau);
          break;
        case SchemeId::noncoop_multiband:
          result.decisions = local_decisions();
          break;
        case SchemeId::noncoop_singleband:
          result = noncoop_singleband(local_decisions(), picks, p.plan);
          break;
        case SchemeId::proposed_multiband:
          result.decisions = decide(w_cooperative, p.lambda_cooperative[t]);
          break;
        case SchemeId::proposed_singleband: {
          const auto lambda = calibrate_threshold(
              p.topology, *singleband_mask, &powers, params, p.scale, sc.propagation.fading,
              sc.propagation.fading_block_iterations, calibration_energy(p, t),
              sensing.calibration_runs, calibration_seed(seed, kCalibrateSingleband, ru));
          result = {decide(w_singleband, lambda, &informed), *singleband_mask};
          break;
        }
      }

      auto* slot = &out.values[(s * T + t) * kMetricCount];
      slot[0] = utilization_ratio(result.decisions, truth);
      slot[1] = misdetection_probability(result.decisions, truth);
      slot[2] = correct_decision_pct(result.decisions, truth);
      slot[3] = correct_decision_pct(result.decisions, truth, &result.sensed);
      if (sc.devices.count > 0)
        slot[4] = static_cast<double>(
            schedule_devices(result.decisions, truth, attachment, sc.devices.capacity_per_block));

      if (campaign.footprint && r == 0 && t == 0)
        for (int k = 0; k < K; ++k)
          for (int m = 0; m < p.plan.channel_count; ++m) {
            const auto ku = static_cast<std::size_t>(k);
            const auto mu = static_cast<std::size_t>(m);
            out.footprint.push_back({k, p.topology.node(k).position, m, energy_dbm(ku, mu),
                                     campaign.thresholds_dbm[t], id, result.decisions(ku, mu)});
          }
    }
  }
  return out;
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::available: return "available";
    case Verdict::busy: return "busy";
    case Verdict::none: return "none";
  }
  return "none";
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

// Header plus rows of a CSV file written by write_campaign.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(split(line, ','));
  if (rows.size() < 2) throw ConfigError("'" + path.string() + "' holds no results");
  return rows;
}

std::size_t column(const std::vector<std::string>& header, std::string_view name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ConfigError("results file lacks column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::string_view metric_name(Metric metric) {
  switch (metric) {
    case Metric::utilization_ratio: return "utilization_ratio";
    case Metric::misdetection_probability: return "misdetection_probability";
    case Metric::correct_pct_all: return "correct_pct_all";
    case Metric::correct_pct_own: return "correct_pct_own";
    case Metric::scheduled_devices: return "scheduled_devices";
  }
  return "unknown";
}

std::vector<double> default_thresholds_dbm() {
  std::vector<double> out;
  for (int t = -82; t <= -52; t += 2) out.push_back(t);
  return out;
}

RealizationMetrics run_realization(const Campaign& campaign, int index) {
  return realize(prepare(campaign), campaign, index);
}

CampaignResult run_campaign(const Campaign& campaign) {
  const Prepared prepared = prepare(campaign);
  const int R = campaign.realizations;
  std::vector<std::optional<RealizationMetrics>> per(static_cast<std::size_t>(R));

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (int r = next++; r < R && !failed; r = next++) {
      try {
        per[static_cast<std::size_t>(r)] = realize(prepared, campaign, r);
        log_message(LogLevel::debug, "realization " + std::to_string(r) + " frame checksum " +
                                         std::to_string(per[static_cast<std::size_t>(r)]
                                                            ->record.frame_checksum));
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  const int workers = std::clamp(campaign.workers, 1, R);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  CampaignResult result;
  result.campaign = campaign;
  const auto T = campaign.thresholds_dbm.size();
  for (std::size_t s = 0; s < campaign.schemes.size(); ++s)
    for (std::size_t t = 0; t < T; ++t)
      for (int q = 0; q < kMetricCount; ++q) {
        MetricSummary summary{campaign.schemes[s], campaign.thresholds_dbm[t], kMetrics[q], {}};
        for (const auto& rm : per) {
          const auto& v = rm->values[(s * T + t) * kMetricCount + static_cast<std::size_t>(q)];
          if (v) summary.stats.add(*v);
        }
        result.summaries.push_back(summary);
      }
  for (auto& rm : per) {
    result.realizations.push_back(rm->record);
    result.values.push_back(std::move(rm->values));
    if (!rm->footprint.empty()) result.footprint = std::move(rm->footprint);
  }
  log_message(LogLevel::info, "campaign finished: " + std::to_string(R) + " realizations");
  return result;
}

std::optional<double> CampaignResult::value(int r, std::size_t scheme, std::size_t threshold,
                                            Metric metric) const {
  const auto T = campaign.thresholds_dbm.size();
  const auto q = static_cast<std::size_t>(metric);
  return values.at(static_cast<std::size_t>(r)).at((scheme * T + threshold) * kMetricCount + q);
}

std::string results_csv(const CampaignResult& result) {
  std::string out = "scheme,threshold_dbm,metric,mean,std,realizations\n";
  for (const auto& s : result.summaries) {
    const bool any = s.stats.count() > 0;
    out += std::string(scheme_name(s.scheme)) + "," + fmt(s.threshold_dbm) + "," +
           std::string(metric_name(s.metric)) + "," + (any ? fmt(s.stats.mean()) : "nan") + "," +
           (any ? fmt(s.stats.stddev()) : "nan") + "," + std::to_string(s.stats.count()) + "\n";
  }
  return out;
}

std::string realizations_csv(const CampaignResult& result) {
  std::string out = "realization,frame_checksum,incumbents,assignment_objective\n";
  char buf[32];
  for (const auto& r : result.realizations) {
    std::snprintf(buf, sizeof buf, "%016" PRIx64, r.frame_checksum);
    out += std::to_string(r.index) + "," + buf + "," + std::to_string(r.incumbents) + "," +
           (r.assignment_objective ? fmt(*r.assignment_objective) : "") + "\n";
  }
  return out;
}

std::string footprint_csv(const CampaignResult& result) {
  std::string out = "k,x,y,m,energy_dbm,threshold_dbm,scheme,decision\n";
  for (const auto& f : result.footprint)
    out += std::to_string(f.k) + "," + fmt(f.position.x) + "," + fmt(f.position.y) + "," +
           std::to_string(f.m) + "," + fmt(f.energy_dbm) + "," + fmt(f.threshold_dbm) + "," +
           std::string(scheme_name(f.scheme)) + "," + std::string(verdict_name(f.decision)) + "\n";
  return out;
}

std::string summary_json(const CampaignResult& result) {
  using nlohmann::json;
  const auto& c = result.campaign;
  json schemes = json::array();
  for (SchemeId id : c.schemes) schemes.push_back(scheme_name(id));
  json metrics = json::array();
  for (const auto& s : result.summaries) {
    json row = {{"scheme", scheme_name(s.scheme)},
                {"threshold_dbm", s.threshold_dbm},
                {"metric", metric_name(s.metric)},
                {"realizations", s.stats.count()}};
    if (s.stats.count() > 0) {
      row["mean"] = s.stats.mean();
      row["std"] = s.stats.stddev();
    }
    metrics.push_back(row);
  }
  Scenario used = c.scenario;
  used.seed = c.seed;
  json j = {{"scenario", json::parse(scenario_to_json(used))},
            {"seed", c.seed},
            {"realizations", c.realizations},
            {"thresholds_dbm", c.thresholds_dbm},
            {"schemes", schemes},
            {"metrics", metrics}};
  return j.dump(2) + "\n";
}

void write_campaign(const CampaignResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir + "': " + ec.message());
  auto write = [&](const char* name, const std::string& body) {
    std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + (fs::path(out_dir) / name).string() + "'");
    out << body;
  };
  write("results.csv", results_csv(result));
  write("realizations.csv", realizations_csv(result));
  if (result.campaign.footprint) write("footprint.csv", footprint_csv(result));
  write("summary.json", summary_json(result));
}

std::string emit_plot_data(const std::string& results_dir, const std::string& figure,
                           const PlotOptions& options) {
  namespace fs = std::filesystem;
  static const std::map<std::string, std::vector<std::string>> kSeriesMetrics = {
      {"utilization-vs-threshold", {"utilization_ratio"}},
      {"misdetection-vs-threshold", {"misdetection_probability"}},
      {"correct-vs-threshold", {"correct_pct_all", "correct_pct_own"}},
      {"scheduled-devices", {"scheduled_devices"}},
  };

  if (figure == "footprint-snapshot") {
    const auto rows = read_csv(fs::path(results_dir) / "footprint.csv");
    const auto& h = rows.front();
    const auto c_scheme = column(h, "scheme");
    const auto c_thr = column(h, "threshold_dbm");
    std::string scheme = options.scheme.value_or(rows[1][c_scheme]);
    if (!options.scheme)
      for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i][c_scheme] == "proposed-multiband") scheme = "proposed-multiband";
    const double thr = options.threshold_dbm.value_or(std::stod(rows[1][c_thr]));
    std::string out = "k,x,y,m,energy_dbm,decision\n";
    std::size_t emitted = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& r = rows[i];
      if (r[c_scheme] != scheme || std::stod(r[c_thr]) != thr) continue;
      out += r[column(h, "k")] + "," + r[column(h, "x")] + "," + r[column(h, "y")] + "," +
             r[column(h, "m")] + "," + r[column(h, "energy_dbm")] + "," +
             r[column(h, "decision")] + "\n";
      ++emitted;
    }
    if (emitted == 0) throw ConfigError("no footprint rows for scheme '" + scheme + "'");
    return out;
  }

  const auto it = kSeriesMetrics.find(figure);
  if (it == kSeriesMetrics.end()) throw ConfigError("unknown figure '" + figure + "'");
  const auto rows = read_csv(fs::path(results_dir) / "results.csv");
  const auto& h = rows.front();
  const auto c_scheme = column(h, "scheme");
  const auto c_thr = column(h, "threshold_dbm");
  const auto c_metric = column(h, "metric");
  const auto c_mean = column(h, "mean");
  const auto c_std = column(h, "std");
  const auto c_n = column(h, "realizations");
  std::string out = "scheme,series,threshold_dbm,mean,std,realizations\n";
  std::size_t emitted = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto& wanted = it->second;
    if (std::find(wanted.begin(), wanted.end(), r[c_metric]) == wanted.end()) continue;
    if (r[c_n] == "0") continue;
    out += r[c_scheme] + "," + r[c_metric] + "," + r[c_thr] + "," + r[c_mean] + "," + r[c_std] +
           "," + r[c_n] + "\n";
    ++emitted;
  }
  if (emitted == 0) throw ConfigError("results hold no data for figure '" + figure + "'");
  return out;
}

}  // namespace specsense

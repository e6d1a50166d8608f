#include "specsense/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

#include "specsense/error.hpp"

namespace specsense {

namespace {

constexpr double kMinCouplingDistanceM = 1.0;

double link_pathloss(const PropagationParams& params, double d3, bool los, double ut_height) {
  if (params.model == PathlossModel::free_space) return free_space_pathloss_db(d3, params.carrier_hz);
  return pathloss_db(d3, params.carrier_hz, los, ut_height);
}

LinkState draw_link(const PropagationParams& params, double d2, double d3, double ut_height,
                    Rng& rng) {
  LinkState s;
  if (params.model == PathlossModel::umi) {
    s.los = rng.uniform() < los_probability(d2);
  } else {
    s.los = true;
  }
  s.pathloss_db = link_pathloss(params, d3, s.los, ut_height);
  const double sigma = s.los ? params.shadowing_sigma_los_db : params.shadowing_sigma_nlos_db;
  s.shadowing_db = sigma > 0.0 ? sigma * rng.normal() : 0.0;
  return s;
}

// Channels overlapped by an incumbent and the power placed in each.
std::vector<std::pair<int, double>> channel_shares(const Incumbent& inc, const SpectrumPlan& plan) {
  std::vector<std::pair<int, double>> out;
  const double lo = inc.signal_center_hz - inc.signal_bandwidth_hz / 2.0;
  const double hi = inc.signal_center_hz + inc.signal_bandwidth_hz / 2.0;
  const int first = std::max(0, static_cast<int>(std::floor((lo - plan.band_low_hz()) /
                                                             plan.channel_bandwidth_hz)));
  for (int m = first; m < plan.channel_count; ++m) {
    if (plan.channel_low_hz(m) >= hi) break;
    const double p = incumbent_power_in_channel(inc, plan, m);
    if (p > 0.0) out.emplace_back(m, p);
  }
  return out;
}

}  // namespace

double pathloss_db(double distance_3d_m, double carrier_hz, bool los, double ut_height_m) {
  if (!(distance_3d_m > 0.0))
    throw DomainError("pathloss distance must be > 0, got " + std::to_string(distance_3d_m));
  if (!(carrier_hz > 0.0)) throw DomainError("carrier frequency must be > 0");
  const double f_ghz = carrier_hz / 1e9;
  const double pl_los = 32.4 + 21.0 * std::log10(distance_3d_m) + 20.0 * std::log10(f_ghz);
  if (los) return pl_los;
  const double pl_nlos = 22.4 + 35.3 * std::log10(distance_3d_m) + 21.3 * std::log10(f_ghz) -
                         0.3 * (ut_height_m - 1.5);
  return std::max(pl_los, pl_nlos);
}

double free_space_pathloss_db(double distance_3d_m, double carrier_hz) {
  if (!(distance_3d_m > 0.0)) throw DomainError("pathloss distance must be > 0");
  return 20.0 * std::log10(distance_3d_m) + 20.0 * std::log10(carrier_hz / 1e9) + 32.45;
}

double los_probability(double distance_2d_m) {
  if (distance_2d_m < 0.0) throw std::invalid_argument("distance must be >= 0");
  if (distance_2d_m <= 18.0) return 1.0;
  const double a = 18.0 / distance_2d_m;
  return a + std::exp(-distance_2d_m / 36.0) * (1.0 - a);
}

double incumbent_power_in_channel(const Incumbent& incumbent, const SpectrumPlan& plan, int m) {
  if (m < 0 || m >= plan.channel_count) throw std::out_of_range("channel index");
  const double lo = incumbent.signal_center_hz - incumbent.signal_bandwidth_hz / 2.0;
  const double hi = incumbent.signal_center_hz + incumbent.signal_bandwidth_hz / 2.0;
  const double overlap =
      std::max(0.0, std::min(hi, plan.channel_high_hz(m)) - std::max(lo, plan.channel_low_hz(m)));
  return dbm_to_mw(incumbent.tx_power_dbm) * overlap / incumbent.signal_bandwidth_hz;
}

double noise_power_mw(double bandwidth_hz, double noise_figure_db) {
  return dbm_to_mw(-174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db);
}

LinkRealization::LinkRealization(Array2D<LinkState> links, std::vector<double> tx_power_dbm)
    : links_(std::move(links)), mean_rx_(links_.rows(), links_.cols()) {
  if (tx_power_dbm.size() != links_.cols()) throw std::invalid_argument("tx power count");
  for (std::size_t k = 0; k < links_.rows(); ++k)
    for (std::size_t i = 0; i < links_.cols(); ++i) {
      const auto& s = links_(k, i);
      mean_rx_(k, i) = dbm_to_mw(tx_power_dbm[i] - s.pathloss_db - s.shadowing_db);
    }
}

LinkRealization realize_links(const Topology& topology, std::span<const Incumbent> incumbents,
                              const PropagationParams& params, Rng& rng) {
  const auto K = static_cast<std::size_t>(topology.size());
  Array2D<LinkState> links(K, incumbents.size());
  std::vector<double> tx;
  tx.reserve(incumbents.size());
  for (const auto& inc : incumbents) tx.push_back(inc.tx_power_dbm);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& sap = topology.node(static_cast<int>(k));
    for (std::size_t i = 0; i < incumbents.size(); ++i) {
      const double d2 = distance(sap.position, incumbents[i].position);
      const double dh = sap.height_m - incumbents[i].height_m;
      const double d3 = std::max(kMinCouplingDistanceM, std::hypot(d2, dh));
      links(k, i) = draw_link(params, d2, d3, sap.height_m, rng);
    }
  }
  return LinkRealization(std::move(links), std::move(tx));
}

std::uint64_t MeasurementFrame::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto bytes = std::as_bytes(data_.flat());
  for (std::byte b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= 0x100000001b3ULL;
  }
  return h;
}

MeasurementFrame generate_measurements(const Topology& topology, const SpectrumPlan& plan,
                                       std::span<const Incumbent> incumbents,
                                       const LinkRealization& links,
                                       const PropagationParams& params, int iterations,
                                       Rng& fading_rng) {
  if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  const int K = topology.size();
  const int M = plan.channel_count;
  const double noise = noise_power_mw(plan.channel_bandwidth_hz, params.noise_figure_db);
  MeasurementFrame frame(K, M, iterations, noise);
  const int block = std::max(1, params.fading_block_iterations);
  const bool faded = params.fading == FadingModel::rayleigh;

  std::vector<std::vector<std::pair<int, double>>> shares;
  shares.reserve(incumbents.size());
  for (const auto& inc : incumbents) shares.push_back(channel_shares(inc, plan));

  for (int k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < incumbents.size(); ++i) {
      const double rx = links.mean_rx_mw(k, static_cast<int>(i));
      const double full = dbm_to_mw(incumbents[i].tx_power_dbm);
      for (const auto& [m, tx_share] : shares[i]) {
        const double mean = rx * (tx_share / full);
        double g = 1.0;
        for (int it = 0; it < iterations; ++it) {
          if (faded && it % block == 0) g = fading_rng.exponential();
          frame(k, m, it) += g * mean;
        }
      }
    }
  }
  return frame;
}

double ReferencePowerMap::at(int k, int j) const {
  const auto r = row(k);
  const auto it = std::lower_bound(r.begin(), r.end(), j,
                                   [](const auto& e, int key) { return e.first < key; });
  if (it == r.end() || it->first != j)
    throw std::out_of_range("no reference power for pair (" + std::to_string(k) + ", " +
                            std::to_string(j) + ")");
  return it->second;
}

bool ReferencePowerMap::contains(int k, int j) const {
  const auto r = row(k);
  return std::any_of(r.begin(), r.end(), [j](const auto& e) { return e.first == j; });
}

ReferencePowerMap generate_reference_powers(const Topology& topology,
                                            const PropagationParams& params, Rng& rng) {
  const int K = topology.size();
  std::vector<std::vector<std::pair<int, double>>> entries(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    for (int j : topology.neighbors(k)) {
      if (j <= k) continue;
      const auto& a = topology.node(k);
      const auto& b = topology.node(j);
      const double d2 = distance(a.position, b.position);
      const double d3 = std::max(kMinCouplingDistanceM, std::hypot(d2, a.height_m - b.height_m));
      const auto s = draw_link(params, d2, d3, a.height_m, rng);
      const double p = dbm_to_mw(params.sap_reference_power_dbm - s.pathloss_db - s.shadowing_db);
      entries[static_cast<std::size_t>(k)].emplace_back(j, p);
      entries[static_cast<std::size_t>(j)].emplace_back(k, p);
    }
  }
  for (auto& row : entries) std::sort(row.begin(), row.end());
  return ReferencePowerMap(std::move(entries));
}

Array2D<double> mean_block_energy(const Topology& topology, const SpectrumPlan& plan,
                                  std::span<const Incumbent> incumbents,
                                  const LinkRealization& links, double noise_mw) {
  const auto K = static_cast<std::size_t>(topology.size());
  Array2D<double> energy(K, static_cast<std::size_t>(plan.channel_count), noise_mw);
  for (std::size_t i = 0; i < incumbents.size(); ++i) {
    const double full = dbm_to_mw(incumbents[i].tx_power_dbm);
    for (const auto& [m, tx_share] : channel_shares(incumbents[i], plan))
      for (std::size_t k = 0; k < K; ++k)
        energy(k, static_cast<std::size_t>(m)) +=
            links.mean_rx_mw(static_cast<int>(k), static_cast<int>(i)) * (tx_share / full);
  }
  return energy;
}

GroundTruth compute_ground_truth(const Array2D<double>& mean_energy_mw, double threshold_mw) {
  GroundTruth gt;
  gt.threshold_mw = threshold_mw;
  gt.true_energy_mw = mean_energy_mw;
  gt.busy = Array2D<std::uint8_t>(mean_energy_mw.rows(), mean_energy_mw.cols());
  for (std::size_t k = 0; k < mean_energy_mw.rows(); ++k)
    for (std::size_t m = 0; m < mean_energy_mw.cols(); ++m)
      gt.busy(k, m) = mean_energy_mw(k, m) >= threshold_mw ? 1 : 0;
  return gt;
}

GroundTruth compute_ground_truth(const Topology& topology, const SpectrumPlan& plan,
                                 std::span<const Incumbent> incumbents,
                                 const LinkRealization& links, const PropagationParams& params,
                                 double threshold_mw) {
  const double noise = noise_power_mw(plan.channel_bandwidth_hz, params.noise_figure_db);
  return compute_ground_truth(mean_block_energy(topology, plan, incumbents, links, noise),
                              threshold_mw);
}

}  // namespace specsense

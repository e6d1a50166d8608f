#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "specsense/array.hpp"
#include "specsense/core_model.hpp"
#include "specsense/rng.hpp"

namespace specsense {

enum class PathlossModel { umi, free_space };
enum class FadingModel { none, rayleigh };

struct PropagationParams {
  PathlossModel model = PathlossModel::umi;
  double carrier_hz = 5.43e9;
  double shadowing_sigma_los_db = 4.0;
  double shadowing_sigma_nlos_db = 7.82;
  FadingModel fading = FadingModel::rayleigh;
  /// Number of consecutive sensing iterations that share one fading draw.
  int fading_block_iterations = 1;
  double noise_figure_db = 7.0;
  /// Transmit power of the SAP reference signal used for P-hat.
  double sap_reference_power_dbm = 30.0;
  bool operator==(const PropagationParams&) const = default;
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

/// UMi street-canyon pathloss (below breakpoint). `ut_height_m` enters the
/// NLOS branch only. Throws DomainError for distance <= 0.
double pathloss_db(double distance_3d_m, double carrier_hz, bool los, double ut_height_m = 1.5);

/// Friis free-space pathloss.
double free_space_pathloss_db(double distance_3d_m, double carrier_hz);

/// UMi LOS probability as a function of horizontal distance.
double los_probability(double distance_2d_m);

/// Transmit power (mW) an incumbent places in channel m, assuming a flat PSD.
double incumbent_power_in_channel(const Incumbent& incumbent, const SpectrumPlan& plan, int m);

/// Thermal noise floor -174 dBm/Hz + 10 log10(b) + NF, in mW.
double noise_power_mw(double bandwidth_hz, double noise_figure_db);

struct LinkState {
  bool los = true;
  double pathloss_db = 0.0;
  double shadowing_db = 0.0;
  bool operator==(const LinkState&) const = default;
};

/// Large-scale state of every incumbent -> SAP link for one realization.
class LinkRealization {
 public:
  LinkRealization() = default;
  LinkRealization(Array2D<LinkState> links, std::vector<double> tx_power_dbm);

  int sap_count() const { return static_cast<int>(links_.rows()); }
  int incumbent_count() const { return static_cast<int>(links_.cols()); }
  const LinkState& link(int k, int i) const { return links_(k, i); }

  /// Fading-averaged received power of incumbent i at SAP k (full band).
  double mean_rx_mw(int k, int i) const { return mean_rx_(k, i); }

 private:
  Array2D<LinkState> links_;
  Array2D<double> mean_rx_;
};

/// Draws LOS flags and shadowing for every incumbent -> SAP pair. Distances
/// below 1 m are clamped to 1 m.
LinkRealization realize_links(const Topology& topology, std::span<const Incumbent> incumbents,
                              const PropagationParams& params, Rng& rng);

/// Per-iteration energy measurements Y[k][m][i] in mW.
class MeasurementFrame {
 public:
  MeasurementFrame() = default;
  MeasurementFrame(int saps, int channels, int iterations, double noise_mw)
      : data_(static_cast<std::size_t>(saps), static_cast<std::size_t>(channels),
              static_cast<std::size_t>(iterations), noise_mw),
        noise_mw_(noise_mw) {}

  int sap_count() const { return static_cast<int>(data_.dim0()); }
  int channel_count() const { return static_cast<int>(data_.dim1()); }
  int iterations() const { return static_cast<int>(data_.dim2()); }
  double noise_mw() const { return noise_mw_; }

  double operator()(int k, int m, int i) const { return data_(k, m, i); }
  double& operator()(int k, int m, int i) { return data_(k, m, i); }

  /// FNV-1a over the raw sample bytes; identifies a frame in logs.
  std::uint64_t checksum() const;

  bool operator==(const MeasurementFrame&) const = default;

 private:
  Array3D<double> data_;
  double noise_mw_ = 0.0;
};

/// Y = V + sum_i g * P_rx(i, k, m) with unit-mean fading g.
MeasurementFrame generate_measurements(const Topology& topology, const SpectrumPlan& plan,
                                       std::span<const Incumbent> incumbents,
                                       const LinkRealization& links,
                                       const PropagationParams& params, int iterations,
                                       Rng& fading_rng);

/// Received reference-signal powers P-hat[k][j] (mW) for j in N_k \ {k}.
class ReferencePowerMap {
 public:
  ReferencePowerMap() = default;
  explicit ReferencePowerMap(std::vector<std::vector<std::pair<int, double>>> entries)
      : entries_(std::move(entries)) {}

  int sap_count() const { return static_cast<int>(entries_.size()); }
  /// (j, P-hat[k][j]) sorted by j.
  std::span<const std::pair<int, double>> row(int k) const {
    return entries_.at(static_cast<std::size_t>(k));
  }
  /// Throws std::out_of_range when j is not a neighbor of k.
  double at(int k, int j) const;
  bool contains(int k, int j) const;

 private:
  std::vector<std::vector<std::pair<int, double>>> entries_;
};

/// SAP-to-SAP mean powers through the same pathloss/shadowing model (no
/// fading). One LOS/shadowing draw per unordered pair, so the map is symmetric.
ReferencePowerMap generate_reference_powers(const Topology& topology,
                                            const PropagationParams& params, Rng& rng);

struct GroundTruth {
  Array2D<std::uint8_t> busy;       // K x M
  Array2D<double> true_energy_mw;   // K x M
  double threshold_mw = 0.0;
};

/// Mean (fading-averaged) energy per block and its busy verdict.
Array2D<double> mean_block_energy(const Topology& topology, const SpectrumPlan& plan,
                                  std::span<const Incumbent> incumbents,
                                  const LinkRealization& links, double noise_mw);

GroundTruth compute_ground_truth(const Array2D<double>& mean_energy_mw, double threshold_mw);

GroundTruth compute_ground_truth(const Topology& topology, const SpectrumPlan& plan,
                                 std::span<const Incumbent> incumbents,
                                 const LinkRealization& links, const PropagationParams& params,
                                 double threshold_mw);

}  // namespace specsense

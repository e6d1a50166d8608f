#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "specsense/array.hpp"
#include "specsense/core_model.hpp"
#include "specsense/decision.hpp"
#include "specsense/propagation.hpp"
#include "specsense/scheduler.hpp"

namespace specsense {

/// How raw energies (mW) are mapped onto the filter input y, relative to a
/// fixed reference energy Y_ref:
///  - linear: y = Y / Y_ref
///  - log:    y = log(Y / V) / log(Y_ref / V), so noise maps to 0 and the
///            reference maps to 1.
enum class InputScale { linear, log };

/// Which neighbors enter the reference-power combination of a channel the
/// SAP does not sense.
enum class BetaSet { informative, all_neighbors };

struct DiffusionParams {
  double step_size = 0.005;
  double smoothing = 0.95;
  int iterations = 200;
  double epsilon_guard = 1e-12;
  double initial_weight = 0.0;
  InputScale input_scale = InputScale::log;
  BetaSet beta_set = BetaSet::informative;

  /// Throws ConfigError unless 0 < smoothing < 1, step_size > 0 and
  /// iterations >= 0.
  void validate() const;
  bool operator==(const DiffusionParams&) const = default;
};

/// Maps one measurement (mW) to the filter input. The mapping does not
/// depend on the detection threshold; thresholds enter only through
/// calibration.
struct DetectorScale {
  InputScale scale = InputScale::log;
  double reference_mw = 1.0;
  double noise_mw = 1e-12;

  double operator()(double energy_mw) const;
};

/// Filter inputs y[k][m][i].
using InputFrame = Array3D<double>;

InputFrame normalize_measurements(const MeasurementFrame& frame, const DetectorScale& scale);

SensingMask full_sensing_mask(int saps, int channels);
SensingMask sensing_mask(const Assignment& assignment, const SpectrumPlan& plan);

// Per-block building blocks of one iteration.
double smooth_energy(double d_prev, double y, double smoothing);
double compute_gamma(double d, double y, double w_prev);

/// Similarity weights alpha_j proportional to (w_self + mu*gamma - w_j)^-2,
/// with each squared distance floored at `epsilon_guard`.
void alpha_weights(double w_self_prev, double step_size, double gamma,
                   std::span<const double> neighbor_w_prev, double epsilon_guard,
                   std::span<double> out);
std::vector<double> alpha_weights(double w_self_prev, double step_size, double gamma,
                                  std::span<const double> neighbor_w_prev,
                                  double epsilon_guard = 1e-12);

/// beta_j = P_j / sum P. Returns std::nullopt for an empty (or zero-power)
/// informative set; the caller then freezes w.
std::optional<std::vector<double>> beta_weights(std::span<const double> reference_powers);

/// Convex combination sum_j weights[j] * w[j].
double combine(std::span<const double> weights, std::span<const double> neighbor_w_prev);

double adapt(double psi, double y, double d, double step_size, bool senses_channel);

struct DiffusionState {
  Array2D<double> w;
  Array2D<double> d;
  Array2D<double> psi;
  int iteration = 0;
};

/// Receives every weight vector used in a combination step.
using WeightObserver = std::function<void(int k, int m, int iteration, bool is_alpha,
                                          std::span<const double> weights)>;
/// Receives (k, m, i, w, d, psi) after every iteration.
using TraceSink = std::function<void(int k, int m, int iteration, double w, double d, double psi)>;

/// Synchronous combine-then-adapt sensing across all SAPs. Each round reads
/// only the previous round's weights.
class DiffusionEngine {
 public:
  /// `powers` may be null when every SAP senses every channel.
  DiffusionEngine(const Topology& topology, const SensingMask& senses,
                  const ReferencePowerMap* powers, const DiffusionParams& params);

  /// w = w0, psi = w0, d = first measurement on sensed blocks (0 elsewhere).
  DiffusionState initial_state(const InputFrame& y) const;

  /// One round using y[..][..][state.iteration]; advances state.iteration.
  void step(DiffusionState& state, const InputFrame& y,
            const WeightObserver& observer = nullptr) const;

  /// Runs min(params.iterations, frame length) rounds from the initial state.
  DiffusionState run(const InputFrame& y, const WeightObserver& observer = nullptr,
                     const TraceSink& trace = nullptr) const;

 private:
  Topology topology_;
  SensingMask senses_;
  const ReferencePowerMap* powers_;
  DiffusionParams params_;
};

DiffusionState run_diffusion(const InputFrame& y, const Topology& topology,
                             const SensingMask& senses, const ReferencePowerMap* powers,
                             const DiffusionParams& params);

/// lambda[k][m]: mean final weight over `runs` diffusion runs fed with
/// synthetic energies of mean `energy_mw` on every block (noise plus a
/// faded signal making up the rest).
Array2D<double> calibrate_threshold(const Topology& topology, const SensingMask& senses,
                                    const ReferencePowerMap* powers, const DiffusionParams& params,
                                    const DetectorScale& scale, FadingModel fading,
                                    int fading_block_iterations, double energy_mw, int runs,
                                    std::uint64_t seed);

/// busy iff w >= lambda; blocks outside `decided` (if given) become none.
DecisionMap decide(const Array2D<double>& w, const Array2D<double>& lambda,
                   const SensingMask* decided = nullptr);

}  // namespace specsense

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specsense/decision.hpp"
#include "specsense/diffusion.hpp"
#include "specsense/propagation.hpp"

namespace specsense {

enum class SchemeId {
  genie,
  proposed_multiband,
  proposed_singleband,
  centralized,
  noncoop_multiband,
  noncoop_singleband,
};

/// All schemes in canonical output order.
std::span<const SchemeId> all_schemes();
std::string_view scheme_name(SchemeId id);
/// Accepts the dashed names printed by scheme_name. Throws ConfigError.
SchemeId parse_scheme(std::string_view name);
/// Comma-separated list; "all" expands to every scheme. Duplicates removed,
/// order preserved.
std::vector<SchemeId> parse_scheme_list(std::string_view csv);

/// Decisions plus the blocks the scheme measured itself.
struct SchemeOutput {
  DecisionMap decisions;
  SensingMask sensed;
};

DecisionMap genie(const GroundTruth& truth);

/// Per channel, the mean of all raw samples from all SAPs compared against
/// the threshold; every SAP receives the same verdict.
DecisionMap centralized_egc(const MeasurementFrame& frame, double threshold_mw);

/// Final weights of the self-only filter on every block.
Array2D<double> local_filter_weights(const InputFrame& y, const Topology& topology,
                                     const DiffusionParams& params);

/// Final weights of cooperative sensing under `senses`.
Array2D<double> cooperative_filter_weights(const InputFrame& y, const Topology& topology,
                                           const SensingMask& senses,
                                           const ReferencePowerMap* powers,
                                           const DiffusionParams& params);

/// Self-only adaptive filter on every channel of every SAP.
DecisionMap noncoop_multiband(const InputFrame& y, const Topology& topology,
                              const DiffusionParams& params, const Array2D<double>& lambda);

/// Plain local energy detector: per-block sample mean >= threshold.
DecisionMap noncoop_multiband_raw(const MeasurementFrame& frame, double threshold_mw);

/// One uniformly random subset per SAP (a single channel when p = 1).
std::vector<int> pick_random_subsets(int saps, int subsets, Rng& rng);

/// Restricts full-band local decisions to each SAP's picked subset; the
/// other blocks become `none`.
SchemeOutput noncoop_singleband(const DecisionMap& local, std::span<const int> picks,
                                const SpectrumPlan& plan);

DecisionMap proposed_multiband(const InputFrame& y, const Topology& topology,
                               const ReferencePowerMap& powers, const DiffusionParams& params,
                               const Array2D<double>& lambda);

/// Blocks a SAP neither senses nor hears about from a sensing neighbor
/// stay `none`.
SchemeOutput proposed_singleband(const InputFrame& y, const Topology& topology,
                                 const SensingMask& senses, const ReferencePowerMap& powers,
                                 const DiffusionParams& params, const Array2D<double>& lambda);

/// Blocks that are sensed or have at least one neighbor feeding them under
/// `beta_set`.
SensingMask informed_blocks(const Topology& topology, const SensingMask& senses, BetaSet beta_set);

}  // namespace specsense

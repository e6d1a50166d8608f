#include "specsense/baselines.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>

#include "specsense/error.hpp"

namespace specsense {

namespace {

constexpr std::array<SchemeId, 6> kSchemes = {
    SchemeId::genie,       SchemeId::proposed_multiband, SchemeId::proposed_singleband,
    SchemeId::centralized, SchemeId::noncoop_multiband,  SchemeId::noncoop_singleband,
};

}  // namespace

std::span<const SchemeId> all_schemes() { return kSchemes; }

std::string_view scheme_name(SchemeId id) {
  switch (id) {
    case SchemeId::genie: return "genie";
    case SchemeId::proposed_multiband: return "proposed-multiband";
    case SchemeId::proposed_singleband: return "proposed-singleband";
    case SchemeId::centralized: return "centralized";
    case SchemeId::noncoop_multiband: return "noncoop-multiband";
    case SchemeId::noncoop_singleband: return "noncoop-singleband";
  }
  throw std::logic_error("unknown scheme id");
}

SchemeId parse_scheme(std::string_view name) {
  for (SchemeId id : kSchemes)
    if (scheme_name(id) == name) return id;
  throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

std::vector<SchemeId> parse_scheme_list(std::string_view csv) {
  std::vector<SchemeId> out;
  auto add = [&](SchemeId id) {
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  };
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const auto comma = csv.find(',', pos);
    const auto token = csv.substr(pos, comma == std::string_view::npos ? csv.size() - pos : comma - pos);
    if (token == "all") {
      for (SchemeId id : kSchemes) add(id);
    } else if (!token.empty()) {
      add(parse_scheme(token));
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw ConfigError("empty scheme list");
  return out;
}

DecisionMap genie(const GroundTruth& truth) {
  DecisionMap out(truth.busy.rows(), truth.busy.cols(), Verdict::available);
  for (std::size_t k = 0; k < out.rows(); ++k)
    for (std::size_t m = 0; m < out.cols(); ++m)
      if (truth.busy(k, m)) out(k, m) = Verdict::busy;
  return out;
}

DecisionMap centralized_egc(const MeasurementFrame& frame, double threshold_mw) {
  const int K = frame.sap_count();
  const int M = frame.channel_count();
  const int N = frame.iterations();
  DecisionMap out(static_cast<std::size_t>(K), static_cast<std::size_t>(M), Verdict::available);
  if (K == 0 || N == 0) return out;
  for (int m = 0; m < M; ++m) {
    double sum = 0.0;
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < N; ++i) sum += frame(k, m, i);
    const double mean = sum / (static_cast<double>(K) * N);
    const Verdict v = mean >= threshold_mw ? Verdict::busy : Verdict::available;
    for (int k = 0; k < K; ++k) out(static_cast<std::size_t>(k), static_cast<std::size_t>(m)) = v;
  }
  return out;
}

Array2D<double> local_filter_weights(const InputFrame& y, const Topology& topology,
                                     const DiffusionParams& params) {
  const Topology alone = topology.isolated();
  const auto senses = full_sensing_mask(topology.size(), static_cast<int>(y.dim1()));
  return DiffusionEngine(alone, senses, nullptr, params).run(y).w;
}

Array2D<double> cooperative_filter_weights(const InputFrame& y, const Topology& topology,
                                           const SensingMask& senses,
                                           const ReferencePowerMap* powers,
                                           const DiffusionParams& params) {
  return DiffusionEngine(topology, senses, powers, params).run(y).w;
}

DecisionMap noncoop_multiband(const InputFrame& y, const Topology& topology,
                              const DiffusionParams& params, const Array2D<double>& lambda) {
  return decide(local_filter_weights(y, topology, params), lambda);
}

DecisionMap noncoop_multiband_raw(const MeasurementFrame& frame, double threshold_mw) {
  const int K = frame.sap_count();
  const int M = frame.channel_count();
  const int N = frame.iterations();
  DecisionMap out(static_cast<std::size_t>(K), static_cast<std::size_t>(M), Verdict::available);
  for (int k = 0; k < K; ++k)
    for (int m = 0; m < M; ++m) {
      double sum = 0.0;
      for (int i = 0; i < N; ++i) sum += frame(k, m, i);
      if (N > 0 && sum / N >= threshold_mw)
        out(static_cast<std::size_t>(k), static_cast<std::size_t>(m)) = Verdict::busy;
    }
  return out;
}

std::vector<int> pick_random_subsets(int saps, int subsets, Rng& rng) {
  if (subsets < 1) throw std::invalid_argument("need at least one subset");
  std::vector<int> picks(static_cast<std::size_t>(saps));
  for (auto& p : picks) p = static_cast<int>(rng.index(static_cast<std::uint64_t>(subsets)));
  return picks;
}

SchemeOutput noncoop_singleband(const DecisionMap& local, std::span<const int> picks,
                                const SpectrumPlan& plan) {
  if (picks.size() != local.rows()) throw std::invalid_argument("one pick per SAP required");
  const Assignment assignment(std::vector<int>(picks.begin(), picks.end()), plan.subset_count);
  SchemeOutput out{DecisionMap(local.rows(), local.cols(), Verdict::none),
                   sensing_mask(assignment, plan)};
  for (std::size_t k = 0; k < local.rows(); ++k)
    for (std::size_t m = 0; m < local.cols(); ++m)
      if (out.sensed(k, m)) out.decisions(k, m) = local(k, m);
  return out;
}

DecisionMap proposed_multiband(const InputFrame& y, const Topology& topology,
                               const ReferencePowerMap& powers, const DiffusionParams& params,
                               const Array2D<double>& lambda) {
  const auto senses = full_sensing_mask(topology.size(), static_cast<int>(y.dim1()));
  return decide(cooperative_filter_weights(y, topology, senses, &powers, params), lambda);
}

SensingMask informed_blocks(const Topology& topology, const SensingMask& senses, BetaSet beta_set) {
  SensingMask out(senses.rows(), senses.cols(), 0);
  for (int k = 0; k < topology.size(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    for (std::size_t m = 0; m < senses.cols(); ++m) {
      bool informed = senses(ku, m) != 0;
      for (int j : topology.neighbors(k)) {
        if (informed) break;
        if (j == k) continue;
        informed = beta_set == BetaSet::all_neighbors || senses(static_cast<std::size_t>(j), m);
      }
      out(ku, m) = informed ? 1 : 0;
    }
  }
  return out;
}

SchemeOutput proposed_singleband(const InputFrame& y, const Topology& topology,
                                 const SensingMask& senses, const ReferencePowerMap& powers,
                                 const DiffusionParams& params, const Array2D<double>& lambda) {
  const auto w = cooperative_filter_weights(y, topology, senses, &powers, params);
  const auto informed = informed_blocks(topology, senses, params.beta_set);
  return {decide(w, lambda, &informed), senses};
}

}  // namespace specsense

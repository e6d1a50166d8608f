#include "specsense/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "specsense/error.hpp"

namespace specsense {

void DiffusionParams::validate() const {
  if (!(smoothing > 0.0 && smoothing < 1.0)) throw ConfigError("smoothing must lie in (0, 1)");
  if (!(step_size > 0.0)) throw ConfigError("step size must be > 0");
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  if (!(epsilon_guard > 0.0)) throw ConfigError("epsilon guard must be > 0");
}

double DetectorScale::operator()(double energy_mw) const {
  if (scale == InputScale::linear) return energy_mw / reference_mw;
  return std::log(energy_mw / noise_mw) / std::log(reference_mw / noise_mw);
}

InputFrame normalize_measurements(const MeasurementFrame& frame, const DetectorScale& scale) {
  if (scale.scale == InputScale::log && !(scale.reference_mw > scale.noise_mw))
    throw ConfigError("log input scale needs a reference above the noise floor");
  const auto K = static_cast<std::size_t>(frame.sap_count());
  const auto M = static_cast<std::size_t>(frame.channel_count());
  const auto N = static_cast<std::size_t>(frame.iterations());
  InputFrame y(K, M, N);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t i = 0; i < N; ++i)
        y(k, m, i) = scale(frame(static_cast<int>(k), static_cast<int>(m), static_cast<int>(i)));
  return y;
}

SensingMask full_sensing_mask(int saps, int channels) {
  return SensingMask(static_cast<std::size_t>(saps), static_cast<std::size_t>(channels), 1);
}

SensingMask sensing_mask(const Assignment& assignment, const SpectrumPlan& plan) {
  if (assignment.subset_count() != plan.subset_count)
    throw std::invalid_argument("assignment subset count differs from plan");
  SensingMask mask(static_cast<std::size_t>(assignment.sap_count()),
                   static_cast<std::size_t>(plan.channel_count), 0);
  for (int k = 0; k < assignment.sap_count(); ++k) {
    const auto [first, last] = plan.subset_channels(assignment.subset_of(k));
    for (int m = first; m < last; ++m) mask(static_cast<std::size_t>(k), static_cast<std::size_t>(m)) = 1;
  }
  return mask;
}

double smooth_energy(double d_prev, double y, double smoothing) {
  return smoothing * d_prev + (1.0 - smoothing) * y;
}

double compute_gamma(double d, double y, double w_prev) { return (d - y * w_prev) * y; }

void alpha_weights(double w_self_prev, double step_size, double gamma,
                   std::span<const double> neighbor_w_prev, double epsilon_guard,
                   std::span<double> out) {
  if (neighbor_w_prev.empty()) throw std::invalid_argument("alpha weights need a neighbor");
  const double target = w_self_prev + step_size * gamma;
  double total = 0.0;
  for (std::size_t j = 0; j < neighbor_w_prev.size(); ++j) {
    const double diff = target - neighbor_w_prev[j];
    out[j] = 1.0 / std::max(diff * diff, epsilon_guard);
    total += out[j];
  }
  for (std::size_t j = 0; j < neighbor_w_prev.size(); ++j) out[j] /= total;
}

std::vector<double> alpha_weights(double w_self_prev, double step_size, double gamma,
                                  std::span<const double> neighbor_w_prev, double epsilon_guard) {
  std::vector<double> out(neighbor_w_prev.size());
  alpha_weights(w_self_prev, step_size, gamma, neighbor_w_prev, epsilon_guard, out);
  return out;
}

std::optional<std::vector<double>> beta_weights(std::span<const double> reference_powers) {
  const double total = std::accumulate(reference_powers.begin(), reference_powers.end(), 0.0);
  if (reference_powers.empty() || !(total > 0.0)) return std::nullopt;
  std::vector<double> out(reference_powers.begin(), reference_powers.end());
  for (double& v : out) v /= total;
  return out;
}

double combine(std::span<const double> weights, std::span<const double> neighbor_w_prev) {
  double psi = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) psi += weights[j] * neighbor_w_prev[j];
  return psi;
}

double adapt(double psi, double y, double d, double step_size, bool senses_channel) {
  if (!senses_channel) return psi;
  return psi + step_size * y * (d - y * psi);
}

DiffusionEngine::DiffusionEngine(const Topology& topology, const SensingMask& senses,
                                 const ReferencePowerMap* powers, const DiffusionParams& params)
    : topology_(topology), senses_(senses), powers_(powers), params_(params) {
  params_.validate();
  if (static_cast<int>(senses_.rows()) != topology_.size())
    throw std::invalid_argument("sensing mask rows must equal K");
  bool partial = false;
  for (auto v : senses_.flat()) partial = partial || v == 0;
  if (partial && powers_ == nullptr)
    throw std::invalid_argument("reference powers are required when some channels are not sensed");
}

DiffusionState DiffusionEngine::initial_state(const InputFrame& y) const {
  const auto K = senses_.rows();
  const auto M = senses_.cols();
  DiffusionState s;
  s.w = Array2D<double>(K, M, params_.initial_weight);
  s.psi = Array2D<double>(K, M, params_.initial_weight);
  s.d = Array2D<double>(K, M, 0.0);
  if (y.dim2() > 0)
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t m = 0; m < M; ++m)
        if (senses_(k, m)) s.d(k, m) = y(k, m, 0);
  return s;
}

void DiffusionEngine::step(DiffusionState& state, const InputFrame& y,
                           const WeightObserver& observer) const {
  const int K = topology_.size();
  const auto M = senses_.cols();
  const auto i = static_cast<std::size_t>(state.iteration);
  if (i >= y.dim2()) throw std::out_of_range("no measurements left for this iteration");
  const double mu = params_.step_size;

  const Array2D<double> w_prev = state.w;
  std::vector<double> nbr_w;
  std::vector<double> weights;
  std::vector<double> powers;

  for (int k = 0; k < K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const auto nbrs = topology_.neighbors(k);
    for (std::size_t m = 0; m < M; ++m) {
      if (senses_(ku, m)) {
        const double yi = y(ku, m, i);
        const double d = smooth_energy(state.d(ku, m), yi, params_.smoothing);
        const double gamma = compute_gamma(d, yi, w_prev(ku, m));
        nbr_w.clear();
        for (int j : nbrs) nbr_w.push_back(w_prev(static_cast<std::size_t>(j), m));
        weights.resize(nbr_w.size());
        alpha_weights(w_prev(ku, m), mu, gamma, nbr_w, params_.epsilon_guard, weights);
        if (observer) observer(k, static_cast<int>(m), state.iteration, true, weights);
        const double psi = combine(weights, nbr_w);
        state.d(ku, m) = d;
        state.psi(ku, m) = psi;
        state.w(ku, m) = adapt(psi, yi, d, mu, true);
      } else {
        nbr_w.clear();
        powers.clear();
        for (int j : nbrs) {
          if (j == k) continue;
          const auto ju = static_cast<std::size_t>(j);
          if (params_.beta_set == BetaSet::informative && !senses_(ju, m)) continue;
          nbr_w.push_back(w_prev(ju, m));
          powers.push_back(powers_->at(k, j));
        }
        const auto beta = beta_weights(powers);
        double psi = w_prev(ku, m);
        if (beta) {
          if (observer) observer(k, static_cast<int>(m), state.iteration, false, *beta);
          psi = combine(*beta, nbr_w);
        }
        state.psi(ku, m) = psi;
        state.w(ku, m) = adapt(psi, 0.0, 0.0, mu, false);
      }
    }
  }
  ++state.iteration;
}

DiffusionState DiffusionEngine::run(const InputFrame& y, const WeightObserver& observer,
                                    const TraceSink& trace) const {
  auto state = initial_state(y);
  const int rounds = std::min(params_.iterations, static_cast<int>(y.dim2()));
  for (int r = 0; r < rounds; ++r) {
    step(state, y, observer);
    if (trace)
      for (std::size_t k = 0; k < state.w.rows(); ++k)
        for (std::size_t m = 0; m < state.w.cols(); ++m)
          trace(static_cast<int>(k), static_cast<int>(m), state.iteration, state.w(k, m),
                state.d(k, m), state.psi(k, m));
  }
  return state;
}

DiffusionState run_diffusion(const InputFrame& y, const Topology& topology,
                             const SensingMask& senses, const ReferencePowerMap* powers,
                             const DiffusionParams& params) {
  return DiffusionEngine(topology, senses, powers, params).run(y);
}

Array2D<double> calibrate_threshold(const Topology& topology, const SensingMask& senses,
                                    const ReferencePowerMap* powers, const DiffusionParams& params,
                                    const DetectorScale& scale, FadingModel fading,
                                    int fading_block_iterations, double energy_mw, int runs,
                                    std::uint64_t seed) {
  if (runs < 1) throw std::invalid_argument("calibration runs must be >= 1");
  const double signal_mw = energy_mw - scale.noise_mw;
  if (signal_mw < 0.0) throw ConfigError("calibration energy lies below the noise floor");

  const auto K = senses.rows();
  const auto M = senses.cols();
  const auto N = static_cast<std::size_t>(params.iterations);
  const int block = std::max(1, fading_block_iterations);
  const DiffusionEngine engine(topology, senses, powers, params);

  Array2D<double> lambda(K, M, 0.0);
  InputFrame y(K, M, N);
  for (int r = 0; r < runs; ++r) {
    Rng rng = Rng::substream(seed, Stream::calibration, static_cast<std::uint64_t>(r));
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t m = 0; m < M; ++m) {
        double g = 1.0;
        for (std::size_t i = 0; i < N; ++i) {
          if (fading == FadingModel::rayleigh && i % static_cast<std::size_t>(block) == 0)
            g = rng.exponential();
          y(k, m, i) = scale(scale.noise_mw + g * signal_mw);
        }
      }
    const auto state = engine.run(y);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t m = 0; m < M; ++m) lambda(k, m) += state.w(k, m);
  }
  for (auto& v : lambda.flat()) v /= runs;
  return lambda;
}

DecisionMap decide(const Array2D<double>& w, const Array2D<double>& lambda,
                   const SensingMask* decided) {
  if (w.rows() != lambda.rows() || w.cols() != lambda.cols())
    throw std::invalid_argument("weight and threshold shapes differ");
  DecisionMap out(w.rows(), w.cols(), Verdict::available);
  for (std::size_t k = 0; k < w.rows(); ++k)
    for (std::size_t m = 0; m < w.cols(); ++m) {
      if (decided && !(*decided)(k, m)) {
        out(k, m) = Verdict::none;
        continue;
      }
      out(k, m) = w(k, m) >= lambda(k, m) ? Verdict::busy : Verdict::available;
    }
  return out;
}

}  // namespace specsense

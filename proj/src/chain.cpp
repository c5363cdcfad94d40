#include "cvtele/chain.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace cvtele {
namespace {

void require_single_mode(const GaussianState& input, const char* what) {
  if (input.num_modes() != 1) {
    throw std::invalid_argument(std::string(what) + ": single-mode input required");
  }
}

double input_fidelity(const GaussianState& output, const GaussianState& input) {
  return overlap_with_coherent(output, input.mean()(0), input.mean()(1));
}

}  // namespace

void ChainSpec::validate() const {
  if (hops.empty()) {
    throw std::invalid_argument("chain '" + label + "' has no hops");
  }
  for (const auto& hop : hops) hop.validate();
}

FidelityReport FidelityReport::from(std::vector<double> per_hop, double chain) {
  FidelityReport report;
  report.per_hop_F = std::move(per_hop);
  report.chain_F = chain;
  report.classical_margin = chain - kClassicalFidelity;
  report.no_cloning_margin = chain - kNoCloningFidelity;
  report.beats_classical = chain > kClassicalFidelity;
  report.beats_no_cloning = chain > kNoCloningFidelity;
  return report;
}

double sequential_fidelity_ideal(std::size_t n, double r) {
  if (n == 0) throw std::invalid_argument("sequential_fidelity_ideal: n must be >= 1");
  if (std::isnan(r) || r < 0.0) {
    throw std::invalid_argument("sequential_fidelity_ideal: r must be nonnegative");
  }
  return 1.0 / (1.0 + static_cast<double>(n) * std::exp(-2.0 * r));
}

NoiseBudget accumulate_noise(const ChainSpec& spec) {
  spec.validate();
  NoiseBudget budget;
  budget.per_hop.reserve(spec.hops.size());
  for (const auto& hop : spec.hops) {
    const AddedNoise noise = resource_noise(hop.resource);
    budget.per_hop.push_back(noise);
    budget.totals.delta_x += noise.delta_x;
    budget.totals.delta_p += noise.delta_p;
  }
  budget.out_var_x = kVacuumVariance + budget.totals.delta_x;
  budget.out_var_p = kVacuumVariance + budget.totals.delta_p;
  budget.out_db_x = variance_to_db(budget.out_var_x);
  budget.out_db_p = variance_to_db(budget.out_var_p);
  return budget;
}

double fidelity_unity_gain(double var_x, double var_p) {
  if (!(var_x >= 0.0) || !(var_p >= 0.0)) {
    throw std::invalid_argument("fidelity_unity_gain: variances must be nonnegative");
  }
  if (var_x < kVacuumVariance - kPhysicalityTolerance ||
      var_p < kVacuumVariance - kPhysicalityTolerance) {
    throw UnphysicalStateError("fidelity_unity_gain: output variance below the vacuum level");
  }
  return 2.0 / std::sqrt((1.0 + 4.0 * var_x) * (1.0 + 4.0 * var_p));
}

double threshold_squeezing(std::size_t n, double target_fidelity) {
  if (n == 0) throw std::invalid_argument("threshold_squeezing: n must be >= 1");
  if (!(target_fidelity > 0.0)) {
    throw std::invalid_argument("threshold_squeezing: target fidelity must be positive");
  }
  if (target_fidelity >= 1.0) {
    throw std::domain_error("threshold_squeezing: unit fidelity needs infinite squeezing");
  }
  const double ratio = (1.0 / target_fidelity - 1.0) / static_cast<double>(n);
  if (ratio >= 1.0) return 0.0;
  return -0.5 * std::log(ratio);
}

ShotEnsemble chain_shots(const GaussianState& input, const ChainSpec& spec, const ShotOptions& shots) {
  require_single_mode(input, "chain_shots");
  spec.validate();
  if (shots.n_shots == 0) throw std::invalid_argument("chain_shots: n_shots must be >= 1");
  std::vector<GaussianState> eprs;
  eprs.reserve(spec.hops.size());
  for (const auto& hop : spec.hops) {
    if (hop.has_ideal_resource()) {
      throw std::invalid_argument(
          "chain_shots: ideal resources have no finite shot representation; use analytic mode");
    }
    eprs.push_back(make_epr(hop.resource));
  }

  ShotEnsemble ensemble;
  ensemble.outputs.reserve(shots.n_shots);
  ensemble.bell_log.assign(spec.hops.size(), {});
  for (auto& log : ensemble.bell_log) log.reserve(shots.n_shots);
  for (std::size_t k = 0; k < shots.n_shots; ++k) {
    CounterStream rng(shots.seed, k);
    GaussianState state = input;
    for (std::size_t h = 0; h < spec.hops.size(); ++h) {
      BellResult bell = bell_measure(state, eprs[h], rng);
      state = feedforward(bell.bob, bell.outcome, spec.hops[h]);
      ensemble.bell_log[h].push_back(bell.outcome);
    }
    ensemble.outputs.push_back(std::move(state));
  }
  return ensemble;
}

ChainResult run_chain(const GaussianState& input, const ChainSpec& spec, RunMode mode,
                      const ShotOptions& shots) {
  require_single_mode(input, "run_chain");
  spec.validate();
  NoiseBudget budget = accumulate_noise(spec);

  if (mode == RunMode::Analytic) {
    std::vector<double> per_hop;
    per_hop.reserve(spec.hops.size());
    for (const auto& hop : spec.hops) {
      per_hop.push_back(input_fidelity(teleport_analytic(input, hop), input));
    }
    GaussianState state = input;
    for (const auto& hop : spec.hops) state = teleport_analytic(state, hop);
    const double chain_f = input_fidelity(state, input);
    return ChainResult{std::move(state), std::nullopt, std::move(budget),
                       FidelityReport::from(std::move(per_hop), chain_f)};
  }

  ShotEnsemble ensemble = chain_shots(input, spec, shots);

  // Each hop alone, on an independent seed per hop.
  std::vector<double> per_hop;
  per_hop.reserve(spec.hops.size());
  for (std::size_t h = 0; h < spec.hops.size(); ++h) {
    const Seed hop_seed{shots.seed.value + 1 + h};
    const ShotEnsemble single = teleport_shots(input, spec.hops[h], shots.n_shots, hop_seed);
    per_hop.push_back(single.average_overlap(input.mean()(0), input.mean()(1)));
  }
  const double chain_f = ensemble.average_overlap(input.mean()(0), input.mean()(1));
  GaussianState moments = ensemble.moment_state();
  return ChainResult{std::move(moments), std::move(ensemble), std::move(budget),
                     FidelityReport::from(std::move(per_hop), chain_f)};
}

SwapResult swap_then_teleport(const GaussianState& input, double r, double swap_gain,
                              RunMode mode, const ShotOptions& shots) {
  require_single_mode(input, "swap_then_teleport");
  if (!std::isfinite(r) || r < 0.0) {
    throw std::invalid_argument("swap_then_teleport: r must be finite and nonnegative");
  }
  if (!std::isfinite(swap_gain)) {
    throw std::invalid_argument("swap_then_teleport: swap gain must be finite");
  }
  const SqueezerSpec spec{r, 1.0};
  const GaussianState epr = make_epr({spec, spec});
  // Modes: 0 input, (1,2) first pair, (3,4) second pair.
  const GaussianState joint = input.tensor(epr).tensor(epr);
  const Gains swap{swap_gain, swap_gain};
  const Gains unity{1.0, 1.0};

  // After the swap the modes are (input, 1, 4').
  const GaussianState swapped = teleport_modes(joint, 2, 3, 4, swap);
  const std::array<std::size_t, 2> pair_modes{1, 2};
  GaussianState pair = swapped.marginal(pair_modes);

  if (mode == RunMode::Analytic) {
    GaussianState output = teleport_modes(swapped, 0, 1, 2, unity);
    const double f = input_fidelity(output, input);
    return SwapResult{std::move(output), std::move(pair), std::nullopt,
                      FidelityReport::from({f}, f)};
  }

  if (shots.n_shots == 0) throw std::invalid_argument("swap_then_teleport: n_shots must be >= 1");
  ShotEnsemble ensemble;
  ensemble.outputs.reserve(shots.n_shots);
  ensemble.bell_log.assign(2, {});
  for (std::size_t k = 0; k < shots.n_shots; ++k) {
    CounterStream rng(shots.seed, k);
    JointBellResult swap_bell = bell_measure_modes(joint, 2, 3, rng);
    const GaussianState after_swap = feedforward_mode(swap_bell.remainder, 2, swap_bell.outcome, swap);
    JointBellResult tele_bell = bell_measure_modes(after_swap, 0, 1, rng);
    ensemble.outputs.push_back(feedforward_mode(tele_bell.remainder, 0, tele_bell.outcome, unity));
    ensemble.bell_log[0].push_back(swap_bell.outcome);
    ensemble.bell_log[1].push_back(tele_bell.outcome);
  }
  const double f = ensemble.average_overlap(input.mean()(0), input.mean()(1));
  GaussianState moments = ensemble.moment_state();
  return SwapResult{std::move(moments), std::move(pair), std::move(ensemble),
                    FidelityReport::from({f}, f)};
}

std::vector<double> default_swap_gain_grid() {
  std::vector<double> grid;
  for (int k = 10; k <= 200; ++k) grid.push_back(k / 100.0);
  return grid;
}

GainScan scan_swap_gain(const GaussianState& input, double r, const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("scan_swap_gain: empty gain grid");
  GainScan scan;
  scan.points.reserve(grid.size());
  for (const double g : grid) {
    const SwapResult res = swap_then_teleport(input, r, g);
    scan.points.push_back(GainScanPoint{g, res.fidelity.chain_F});
    if (scan.points.size() == 1 || res.fidelity.chain_F > scan.best.fidelity) {
      scan.best = scan.points.back();
    }
  }
  return scan;
}

}  // namespace cvtele

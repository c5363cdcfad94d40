#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cvtele/gaussian_state.hpp"
#include "cvtele/rng.hpp"
#include "cvtele/teleportation.hpp"

namespace cvtele {

/// Best classical fidelity for coherent-state transfer.
inline constexpr double kClassicalFidelity = 0.5;
/// No-cloning bound.
inline constexpr double kNoCloningFidelity = 2.0 / 3.0;

struct ChainSpec {
  std::vector<TeleporterConfig> hops;
  std::string label;

  void validate() const;
};

struct NoiseBudget {
  std::vector<AddedNoise> per_hop;
  AddedNoise totals;
  double out_var_x = 0.0;
  double out_var_p = 0.0;
  double out_db_x = 0.0;
  double out_db_p = 0.0;
};

struct FidelityReport {
  std::vector<double> per_hop_F;
  double chain_F = 0.0;
  bool beats_classical = false;
  bool beats_no_cloning = false;
  /// chain_F - 1/2 and chain_F - 2/3; thresholds are strict with no slack.
  double classical_margin = 0.0;
  double no_cloning_margin = 0.0;

  static FidelityReport from(std::vector<double> per_hop, double chain);
};

/// 1 / (1 + n e^{-2r}) for n identical pure unity-gain hops.
double sequential_fidelity_ideal(std::size_t n, double r);

/// Sums per-hop EPR noise; output variances assume a coherent input.
NoiseBudget accumulate_noise(const ChainSpec& spec);

/// 2 / sqrt((1 + 4 V_x)(1 + 4 V_p)) for a coherent input at unity gain.
double fidelity_unity_gain(double var_x, double var_p);

/// Squeezing needed for n identical hops to reach `target_fidelity`.
/// Returns 0 when the target is met without entanglement.
double threshold_squeezing(std::size_t n, double target_fidelity);

enum class RunMode { Analytic, Shots };

struct ChainResult {
  /// Analytic output, or the moment state of the shot ensemble.
  GaussianState output;
  std::optional<ShotEnsemble> ensemble;
  NoiseBudget budget;
  FidelityReport fidelity;
};

struct ShotOptions {
  std::size_t n_shots = 100000;
  Seed seed{};
};

/// Shot-mode chain: each shot runs Bell measurement + feedforward through
/// every hop in order. Shot k draws all its variates from stream k.
ShotEnsemble chain_shots(const GaussianState& input, const ChainSpec& spec, const ShotOptions& shots);

/// Feeds the input through every hop in order. Per-hop fidelities teleport the
/// original input through each hop alone; all fidelities are measured against
/// the coherent state at the input mean.
ChainResult run_chain(const GaussianState& input, const ChainSpec& spec, RunMode mode,
                      const ShotOptions& shots = {});

/// Entanglement swapping over two EPR pairs at squeezing r, followed by
/// teleportation of `input` over the swapped pair.
///
/// Pairs (1,2) and (3,4) are Bell-measured on modes 2 and 3; mode 4 is
/// displaced with `swap_gain` (same for x and p). The input is then
/// teleported at unity gain using modes 1 and 4.
struct SwapResult {
  GaussianState output;
  /// State of modes 1 and 4 after the swap (outcome-averaged in analytic mode).
  GaussianState swapped_pair;
  std::optional<ShotEnsemble> ensemble;
  FidelityReport fidelity;
};
SwapResult swap_then_teleport(const GaussianState& input, double r, double swap_gain,
                              RunMode mode = RunMode::Analytic, const ShotOptions& shots = {});

struct GainScanPoint {
  double gain = 0.0;
  double fidelity = 0.0;
};
struct GainScan {
  std::vector<GainScanPoint> points;
  GainScanPoint best;
};

/// Default grid 0.10, 0.11, ..., 2.00.
std::vector<double> default_swap_gain_grid();

/// Brute-force scan of swap_then_teleport fidelity over `grid` (analytic).
GainScan scan_swap_gain(const GaussianState& input, double r,
                        const std::vector<double>& grid = default_swap_gain_grid());

}  // namespace cvtele

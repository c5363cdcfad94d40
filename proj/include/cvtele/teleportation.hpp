#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "cvtele/gaussian_state.hpp"
#include "cvtele/rng.hpp"

namespace cvtele {

/// Residual EPR noise added by one teleporter:
/// delta_x = Var(x_A - x_B), delta_p = Var(p_A + p_B).
struct AddedNoise {
  double delta_x = 0.0;
  double delta_p = 0.0;
};

/// Squeezer pair feeding the EPR beam splitter. `first` sets Var(x_A - x_B),
/// `second` sets Var(p_A + p_B).
using EprResource = std::array<SqueezerSpec, 2>;

/// dB above the vacuum level: 10 log10(V / (1/4)).
double variance_to_db(double variance);
double db_to_variance(double db);
/// Added noise of a unity-gain hop whose coherent-input output sits at `db`.
double added_noise_from_db(double db);

struct Gains {
  double g_x = 1.0;
  double g_p = 1.0;
};

struct TeleporterConfig {
  EprResource resource{};
  double g_x = 1.0;
  double g_p = 1.0;

  /// Both squeezers set to `spec`, unity gains.
  static TeleporterConfig unity(const SqueezerSpec& spec);

  /// Pure resource reproducing a given added noise at unity gain.
  /// A zero component maps to an ideal (infinitely squeezed) source.
  /// Throws std::invalid_argument unless 0 <= delta <= 1/2.
  static TeleporterConfig from_added_noise(const AddedNoise& noise, double excess = 1.0);

  /// Resource reproducing a coherent-input output variance of `db_x` / `db_p`
  /// above the vacuum level.
  static TeleporterConfig from_output_db(double db_x, double db_p, double excess = 1.0);

  bool has_ideal_resource() const noexcept;
  void validate() const;
};

struct BellOutcome {
  double x_u = 0.0;
  double p_v = 0.0;
};

/// Two-mode EPR state (modes A, B) from two squeezed vacua on a 50/50 splitter.
GaussianState make_epr(const EprResource& resource);

/// Var(x_A - x_B) and Var(p_A + p_B) of a resource, computed by covariance
/// propagation. Zero for an ideal source.
AddedNoise resource_noise(const EprResource& resource);

/// Var(x_a - x_b) and Var(p_a + p_b) read off a multimode state.
AddedNoise epr_correlation_noise(const GaussianState& state, std::size_t mode_a, std::size_t mode_b);

/// Shot-level Bell measurement on an arbitrary joint state: mixes `in_mode`
/// with `a_mode` on a 50/50 splitter, samples x_u = (x_in - x_a)/sqrt2 and
/// p_v = (p_in + p_a)/sqrt2, and returns the conditioned state of the other
/// modes (relative order preserved).
struct JointBellResult {
  BellOutcome outcome;
  GaussianState remainder;
};
JointBellResult bell_measure_modes(const GaussianState& state, std::size_t in_mode,
                                   std::size_t a_mode, CounterStream& rng);

struct BellResult {
  BellOutcome outcome;
  GaussianState bob;
};
/// Alice's Bell measurement on input (1 mode) and EPR half A of `epr` (2 modes).
BellResult bell_measure(const GaussianState& input, const GaussianState& epr, CounterStream& rng);

/// Bob's displacement by (sqrt2 g_x x_u, sqrt2 g_p p_v).
GaussianState feedforward(const GaussianState& bob, const BellOutcome& outcome,
                          const TeleporterConfig& cfg);
GaussianState feedforward_mode(const GaussianState& state, std::size_t mode,
                               const BellOutcome& outcome, const Gains& gains);

/// Outcome-averaged teleportation of `in_mode` onto `b_mode` using `a_mode`
/// as Alice's half, on a joint state. The result drops `in_mode` and `a_mode`;
/// `b_mode` becomes x_b + g_x (x_in - x_a), p_b + g_p (p_in + p_a).
GaussianState teleport_modes(const GaussianState& state, std::size_t in_mode, std::size_t a_mode,
                             std::size_t b_mode, const Gains& gains);

/// Output of one teleporter averaged over Bell outcomes. At unity gain the
/// mean is preserved and cov gains diag(delta_x, delta_p).
GaussianState teleport_analytic(const GaussianState& input, const TeleporterConfig& cfg);

/// Per-shot record of a Monte Carlo run. `bell_log[hop][shot]`.
struct ShotEnsemble {
  std::vector<GaussianState> outputs;
  std::vector<std::vector<BellOutcome>> bell_log;

  std::size_t size() const noexcept { return outputs.size(); }

  /// First and second moments of the mixture over shots: mean of means, and
  /// average conditional cov plus the scatter of the conditional means.
  Eigen::VectorXd mean() const;
  Eigen::MatrixXd covariance() const;
  GaussianState moment_state() const;

  /// Shot-averaged overlap with a coherent state.
  double average_overlap(double alpha_x, double alpha_p) const;
};

/// One verifier homodyne draw per shot output at `phase` (stream = shot index).
std::vector<double> measure_ensemble(const ShotEnsemble& ensemble, double phase, Seed seed);

/// Runs bell_measure + feedforward once per shot. Shot k draws from stream k.
ShotEnsemble teleport_shots(const GaussianState& input, const TeleporterConfig& cfg,
                            std::size_t n_shots, Seed seed);

/// Componentwise ratio out/in. Throws std::domain_error for a zero input mean.
Gains calibrate_gain(const Eigen::Vector2d& measured_out_mean, const Eigen::Vector2d& in_mean);

/// True when |g - 1| <= tolerance on both quadratures.
bool is_unity_gain(const Gains& gains, double tolerance);

}  // namespace cvtele

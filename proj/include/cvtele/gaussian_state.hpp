#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "cvtele/rng.hpp"

namespace cvtele {

/// Quadrature variance of the vacuum in units where [x, p] = i/2.
inline constexpr double kVacuumVariance = 0.25;

/// Slack on the symplectic-eigenvalue bound when testing physicality.
inline constexpr double kPhysicalityTolerance = 1e-9;

/// Raised when a covariance matrix violates the uncertainty principle or is
/// otherwise not a valid Gaussian state.
class UnphysicalStateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class Quadrature { X, P };

/// Single-mode squeezed-vacuum source. `excess` multiplies the antisqueezed
/// variance and models an impure (thermal-like) squeezer; 1 means pure.
struct SqueezerSpec {
  double r = 0.0;
  double excess = 1.0;

  /// Infinitely squeezed source. Only usable through analytic propagation.
  static SqueezerSpec ideal() noexcept;

  bool is_ideal() const noexcept;
  double squeezed_variance() const noexcept;
  double antisqueezed_variance() const noexcept;

  /// Throws std::invalid_argument on r < 0, NaN, or excess < 1.
  void validate() const;
};

/// One homodyne outcome. The phase is kept in [0, pi); a raw phase in
/// [pi, 2pi) is folded back with the sign of the value flipped.
struct HomodyneSample {
  double phase = 0.0;
  double value = 0.0;

  static HomodyneSample canonical(double phase, double value) noexcept;
};

/// N-mode Gaussian state stored as mean vector and covariance matrix with
/// interleaved ordering (x1, p1, x2, p2, ...). Vacuum covariance is I/4.
///
/// Instances are immutable. The public constructor symmetrizes `cov` (after
/// checking asymmetry <= 1e-10) and rejects states whose symplectic spectrum
/// falls below 1/4.
class GaussianState {
 public:
  GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  std::size_t num_modes() const noexcept { return static_cast<std::size_t>(mean_.size() / 2); }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& cov() const noexcept { return cov_; }

  Eigen::Vector2d mode_mean(std::size_t mode) const;
  Eigen::Matrix2d mode_cov(std::size_t mode) const;

  /// Reduced state of a single mode.
  GaussianState marginal(std::size_t mode) const;

  /// Reduced state of the listed modes, in the listed order.
  GaussianState marginal(std::span<const std::size_t> modes) const;

  /// Tensor product; modes of `other` are appended after this state's modes.
  GaussianState tensor(const GaussianState& other) const;

  /// Sorted symplectic eigenvalues (N values).
  Eigen::VectorXd symplectic_spectrum() const;

  bool is_physical(double tol = kPhysicalityTolerance) const;

 private:
  struct Unchecked {};
  GaussianState(Unchecked, Eigen::VectorXd mean, Eigen::MatrixXd cov) noexcept;

  // Transformations below provably preserve physicality and skip the check.
  friend GaussianState apply_symplectic(const GaussianState&, const Eigen::MatrixXd&);
  friend GaussianState displace(const GaussianState&, std::size_t, double, double);

  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

/// Block-diagonal symplectic form for n modes.
Eigen::MatrixXd symplectic_form(std::size_t num_modes);

/// Symplectic eigenvalues of a 2N x 2N covariance matrix, ascending.
/// Throws UnphysicalStateError when `cov` is not positive definite.
Eigen::VectorXd symplectic_spectrum(const Eigen::MatrixXd& cov);

/// True when cov > 0 and every symplectic eigenvalue is >= 1/4 - tol.
bool is_physical_covariance(const Eigen::MatrixXd& cov, double tol = kPhysicalityTolerance);

GaussianState make_vacuum(std::size_t num_modes);
GaussianState make_coherent(double alpha_x, double alpha_p);
GaussianState make_squeezed(const SqueezerSpec& spec, Quadrature axis);

/// Thermal single-mode state with variance `variance` >= 1/4 in both quadratures.
GaussianState make_thermal(double variance);

/// Applies a 2N x 2N symplectic matrix to means and covariance. Throws
/// std::invalid_argument if S fails S Omega S^T = Omega to 1e-10.
GaussianState apply_symplectic(const GaussianState& state, const Eigen::MatrixXd& symplectic);

/// Mixes modes a and b: a' = c a + s b, b' = -s a + c b with c = sqrt(T).
GaussianState beam_splitter(const GaussianState& state, std::size_t mode_a, std::size_t mode_b,
                            double transmittance);

/// Rotates mode `mode` in phase space by `angle` (x -> x cos + p sin).
GaussianState phase_rotate(const GaussianState& state, std::size_t mode, double angle);

GaussianState displace(const GaussianState& state, std::size_t mode, double dx, double dp);

/// Mean and variance of x cos(phase) + p sin(phase) on one mode.
struct QuadratureMarginal {
  double mean = 0.0;
  double variance = 0.0;
};
QuadratureMarginal quadrature_marginal(const GaussianState& state, std::size_t mode, double phase);

/// Conditions on a homodyne outcome and removes the measured mode. Requires
/// at least two modes.
GaussianState homodyne_condition(const GaussianState& state, std::size_t mode, double phase,
                                 double outcome);

struct HomodyneDraw {
  HomodyneSample sample;
  /// Conditioned state of the unmeasured modes; empty for a single-mode input.
  std::optional<GaussianState> remainder;
};

/// Draws one homodyne outcome from the quadrature marginal and conditions the
/// rest of the system on it. Consumes one normal variate from `rng`.
HomodyneDraw homodyne_sample(const GaussianState& state, std::size_t mode, double phase,
                             CounterStream& rng);

/// Wigner function of a single-mode Gaussian state, normalized to unit integral.
double wigner_analytic(const GaussianState& state, double x, double p);

/// Overlap <alpha| rho |alpha> with the coherent state of mean (alpha_x, alpha_p).
double overlap_with_coherent(const GaussianState& state, double alpha_x, double alpha_p);

}  // namespace cvtele

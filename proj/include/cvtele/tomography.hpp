#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvtele/chain.hpp"
#include "cvtele/gaussian_state.hpp"
#include "cvtele/rng.hpp"
#include "cvtele/teleportation.hpp"

namespace cvtele {

enum class ScanKind {
  /// Sample k is measured at phase (k mod bins) * pi / bins.
  UniformGrid,
  /// Phase advances linearly over [0, pi) across the whole acquisition.
  Ramp,
};

struct ScanSpec {
  ScanKind kind = ScanKind::UniformGrid;
  std::size_t bins = 180;

  double phase_for(std::size_t sample, std::size_t n_samples) const;
};

std::string to_string(ScanKind kind);
ScanKind scan_kind_from_string(const std::string& name);

struct TomographyDataset {
  std::vector<HomodyneSample> samples;
  std::string source_label;
  Seed seed{};
  ScanSpec scan{};
};

/// Phase-scanned homodyne acquisition on a single-mode state. Sample k draws
/// from stream k of `seed`.
TomographyDataset acquire(const GaussianState& state, std::size_t n_samples, const ScanSpec& scan,
                          Seed seed, std::string source_label = "state");

/// Same, but sample k measures the k-th output of a shot ensemble, so each
/// point comes from a fresh run of the protocol.
TomographyDataset acquire(const ShotEnsemble& ensemble, const ScanSpec& scan, Seed seed,
                          std::string source_label = "ensemble");

struct GridSpec {
  double x_min = -6.0;
  double x_max = 6.0;
  std::size_t nx = 121;
  double p_min = -6.0;
  double p_max = 6.0;
  std::size_t np = 121;

  void validate() const;
};

/// Ramp-filter cutoff (angular frequency conjugate to the quadrature value)
/// used when none is given.
inline constexpr double kDefaultCutoff = 6.0;

struct ReconstructionOptions {
  GridSpec grid{};
  double cutoff = kDefaultCutoff;
  std::size_t phase_bins = 180;
  std::size_t quadrature_bins = 128;
  double quadrature_span = 6.0;
};

struct WignerGrid {
  std::vector<double> x_axis;
  std::vector<double> p_axis;
  /// values(i, j) = W(x_axis[i], p_axis[j]).
  Eigen::MatrixXd values;
  double cutoff = 0.0;
  std::size_t sample_count = 0;
  std::string method;

  double dx() const;
  double dp() const;
  double integral() const;
  double max_value() const;

  struct Moments {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  };
  /// First and second moments of the grid taken as a density (trapezoid rule).
  Moments moments() const;

  /// Centroid of the region at or above half the maximum.
  Eigen::Vector2d peak_location() const;

  /// Integral over p at each x (trapezoid rule), i.e. the theta = 0 marginal.
  std::vector<double> x_marginal() const;
};

/// W evaluated on a grid by wigner_analytic.
WignerGrid sample_wigner(const GaussianState& state, const GridSpec& grid);

/// Filtered back-projection. Samples are binned by phase and quadrature
/// value, each angular histogram is convolved with the band-limited ramp
/// kernel (|k| for |k| <= cutoff), and the filtered projections are summed
/// over angle onto the grid. Empty phase bins are filled by linear
/// interpolation between the nearest populated bins.
///
/// Throws std::invalid_argument when fewer than 8 phase bins are populated or
/// when a run of empty phase bins spans more than pi/8.
WignerGrid inverse_radon(const TomographyDataset& data, const ReconstructionOptions& options = {});

struct ReconstructionMetrics {
  double max_abs_error = 0.0;
  double l1_error = 0.0;
  double integral_deviation = 0.0;
  Eigen::Vector2d mean_delta = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov_delta = Eigen::Matrix2d::Zero();
  /// Largest |cov_delta| relative to the matching reference entry scale.
  double cov_relative_error = 0.0;
};

struct QualityBands {
  double max_abs = 0.05;
  double integral = 0.05;
  double l1 = 0.5;
};

ReconstructionMetrics reconstruction_error(const WignerGrid& grid, const GaussianState& reference);
bool within_bands(const ReconstructionMetrics& metrics, const QualityBands& bands = {});

struct Figure4Options {
  double amplitude = 1.5;
  double phase = 0.7853981633974483;  // 45 degrees
  ScanSpec scan{};
  ReconstructionOptions reconstruction{};
};

struct Figure4Result {
  std::array<GaussianState, 3> states;  // input, after hop 1, after hop 2 (analytic)
  std::array<WignerGrid, 3> grids;
};

/// Tomography of the input coherent state and of the outputs after the first
/// and the second hop of `chain`. The teleported datasets measure fresh shot
/// runs of the chain.
Figure4Result simulate_figure4(const ChainSpec& chain, std::size_t n_samples, Seed seed,
                               const Figure4Options& options = {});

}  // namespace cvtele

#include "cvtele/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>

namespace cvtele {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kMinPopulatedPhaseBins = 8;
constexpr double kMaxPhaseGap = kPi / 8.0;

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> axis(n);
  if (n == 1) {
    axis[0] = lo;
    return axis;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) axis[i] = lo + step * static_cast<double>(i);
  return axis;
}

double trapezoid_weight(std::size_t i, std::size_t n) { return (i == 0 || i + 1 == n) ? 0.5 : 1.0; }

// Antiderivative of the band-limited ramp kernel
// h(t) = int_{|k| <= K} |k| e^{ikt} dk / (4 pi^2), with H(0) = 0.
double ramp_antiderivative(double u, double cutoff) {
  if (std::abs(u) < 1e-12) return 0.0;
  return (1.0 - std::cos(cutoff * u)) / (2.0 * kPi * kPi * u);
}

// Runs of phase bins with no samples, as (first empty bin, length) in the
// circular sense.
std::size_t longest_empty_run(const std::vector<std::size_t>& counts) {
  const std::size_t n = counts.size();
  std::size_t best = 0;
  std::size_t run = 0;
  // Two passes handle runs that wrap around the end.
  for (std::size_t k = 0; k < 2 * n; ++k) {
    if (counts[k % n] == 0) {
      ++run;
      best = std::max(best, std::min(run, n));
    } else {
      run = 0;
    }
  }
  return best;
}

}  // namespace

// --- scan -------------------------------------------------------------------

double ScanSpec::phase_for(std::size_t sample, std::size_t n_samples) const {
  if (kind == ScanKind::UniformGrid) {
    if (bins == 0) throw std::invalid_argument("ScanSpec: bins must be >= 1");
    return kPi * static_cast<double>(sample % bins) / static_cast<double>(bins);
  }
  return kPi * static_cast<double>(sample) / static_cast<double>(std::max<std::size_t>(n_samples, 1));
}

std::string to_string(ScanKind kind) {
  return kind == ScanKind::UniformGrid ? "uniform_grid" : "ramp";
}

ScanKind scan_kind_from_string(const std::string& name) {
  if (name == "uniform_grid") return ScanKind::UniformGrid;
  if (name == "ramp") return ScanKind::Ramp;
  throw std::invalid_argument("unknown scan kind '" + name + "' (expected uniform_grid or ramp)");
}

// --- acquisition ------------------------------------------------------------

TomographyDataset acquire(const GaussianState& state, std::size_t n_samples, const ScanSpec& scan,
                          Seed seed, std::string source_label) {
  if (n_samples == 0) throw std::invalid_argument("acquire: n_samples must be >= 1");
  if (state.num_modes() != 1) throw std::invalid_argument("acquire: single-mode state required");
  TomographyDataset data{{}, std::move(source_label), seed, scan};
  data.samples.reserve(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    CounterStream rng(seed, k);
    const double phase = scan.phase_for(k, n_samples);
    data.samples.push_back(homodyne_sample(state, 0, phase, rng).sample);
  }
  return data;
}

TomographyDataset acquire(const ShotEnsemble& ensemble, const ScanSpec& scan, Seed seed,
                          std::string source_label) {
  if (ensemble.size() == 0) throw std::invalid_argument("acquire: empty ensemble");
  TomographyDataset data{{}, std::move(source_label), seed, scan};
  data.samples.reserve(ensemble.size());
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    CounterStream rng(seed, k);
    const double phase = scan.phase_for(k, ensemble.size());
    data.samples.push_back(homodyne_sample(ensemble.outputs[k], 0, phase, rng).sample);
  }
  return data;
}

// --- grids ------------------------------------------------------------------

void GridSpec::validate() const {
  if (nx < 2 || np < 2) throw std::invalid_argument("GridSpec: need at least 2 points per axis");
  if (!(x_max > x_min) || !(p_max > p_min)) {
    throw std::invalid_argument("GridSpec: axis bounds must be increasing");
  }
}

double WignerGrid::dx() const { return x_axis[1] - x_axis[0]; }
double WignerGrid::dp() const { return p_axis[1] - p_axis[0]; }

double WignerGrid::integral() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < x_axis.size(); ++i) {
    for (std::size_t j = 0; j < p_axis.size(); ++j) {
      acc += trapezoid_weight(i, x_axis.size()) * trapezoid_weight(j, p_axis.size()) *
             values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return acc * dx() * dp();
}

double WignerGrid::max_value() const { return values.maxCoeff(); }

WignerGrid::Moments WignerGrid::moments() const {
  double norm = 0.0;
  Eigen::Vector2d first = Eigen::Vector2d::Zero();
  Eigen::Matrix2d second = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < x_axis.size(); ++i) {
    for (std::size_t j = 0; j < p_axis.size(); ++j) {
      const double w = trapezoid_weight(i, x_axis.size()) * trapezoid_weight(j, p_axis.size()) *
                       values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const Eigen::Vector2d v(x_axis[i], p_axis[j]);
      norm += w;
      first += w * v;
      second += w * v * v.transpose();
    }
  }
  Moments m;
  if (norm == 0.0) return m;
  m.mean = first / norm;
  m.cov = second / norm - m.mean * m.mean.transpose();
  return m;
}

Eigen::Vector2d WignerGrid::peak_location() const {
  const double half = 0.5 * max_value();
  double norm = 0.0;
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < x_axis.size(); ++i) {
    for (std::size_t j = 0; j < p_axis.size(); ++j) {
      const double w = values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (w < half) continue;
      norm += w;
      acc += w * Eigen::Vector2d(x_axis[i], p_axis[j]);
    }
  }
  return acc / norm;
}

std::vector<double> WignerGrid::x_marginal() const {
  std::vector<double> out(x_axis.size(), 0.0);
  for (std::size_t i = 0; i < x_axis.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < p_axis.size(); ++j) {
      acc += trapezoid_weight(j, p_axis.size()) *
             values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    out[i] = acc * dp();
  }
  return out;
}

WignerGrid sample_wigner(const GaussianState& state, const GridSpec& grid) {
  grid.validate();
  WignerGrid out;
  out.x_axis = linspace(grid.x_min, grid.x_max, grid.nx);
  out.p_axis = linspace(grid.p_min, grid.p_max, grid.np);
  out.values.resize(static_cast<Eigen::Index>(grid.nx), static_cast<Eigen::Index>(grid.np));
  for (std::size_t i = 0; i < grid.nx; ++i) {
    for (std::size_t j = 0; j < grid.np; ++j) {
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          wigner_analytic(state, out.x_axis[i], out.p_axis[j]);
    }
  }
  out.method = "analytic";
  return out;
}

// --- inverse Radon ----------------------------------------------------------

WignerGrid inverse_radon(const TomographyDataset& data, const ReconstructionOptions& options) {
  options.grid.validate();
  if (data.samples.empty()) throw std::invalid_argument("inverse_radon: empty dataset");
  if (!(options.cutoff >= 0.0)) throw std::invalid_argument("inverse_radon: cutoff must be >= 0");
  if (options.phase_bins < kMinPopulatedPhaseBins || options.quadrature_bins < 2 ||
      !(options.quadrature_span > 0.0)) {
    throw std::invalid_argument("inverse_radon: invalid binning options");
  }

  const std::size_t n_theta = options.phase_bins;
  const std::size_t n_q = options.quadrature_bins;
  const double span = options.quadrature_span;
  const double width = 2.0 * span / static_cast<double>(n_q);

  // Phase bin b is centred on b * pi / n_theta. Phases rounding up to pi wrap
  // onto bin 0 with the quadrature sign flipped.
  std::vector<std::vector<double>> hist(n_theta, std::vector<double>(n_q, 0.0));
  std::vector<std::size_t> counts(n_theta, 0);
  for (const auto& raw : data.samples) {
    const HomodyneSample s = HomodyneSample::canonical(raw.phase, raw.value);
    auto b = static_cast<std::size_t>(std::llround(s.phase * static_cast<double>(n_theta) / kPi));
    double value = s.value;
    if (b >= n_theta) {
      b = 0;
      value = -value;
    }
    ++counts[b];
    const double pos = (value + span) / width;
    if (pos < 0.0 || pos >= static_cast<double>(n_q)) continue;
    hist[b][static_cast<std::size_t>(pos)] += 1.0;
  }

  std::size_t populated = 0;
  for (const auto c : counts) populated += c > 0 ? 1 : 0;
  if (populated < kMinPopulatedPhaseBins) {
    throw std::invalid_argument("inverse_radon: insufficient phase coverage (" +
                                std::to_string(populated) + " populated phase bins, need " +
                                std::to_string(kMinPopulatedPhaseBins) + ")");
  }
  const double bin_angle = kPi / static_cast<double>(n_theta);
  if (static_cast<double>(longest_empty_run(counts)) * bin_angle > kMaxPhaseGap + 1e-12) {
    throw std::invalid_argument("inverse_radon: phase gap too wide to interpolate");
  }

  // Histograms to densities.
  for (std::size_t b = 0; b < n_theta; ++b) {
    if (counts[b] == 0) continue;
    const double scale = 1.0 / (static_cast<double>(counts[b]) * width);
    for (auto& v : hist[b]) v *= scale;
  }

  // Fill empty phase bins. Crossing the pi boundary reverses the quadrature axis.
  const auto reversed = [](std::vector<double> v) {
    std::reverse(v.begin(), v.end());
    return v;
  };
  std::vector<std::vector<double>> proj = hist;
  for (std::size_t b = 0; b < n_theta; ++b) {
    if (counts[b] > 0) continue;
    std::size_t lo_steps = 1;
    while (counts[(b + n_theta - lo_steps) % n_theta] == 0) ++lo_steps;
    std::size_t hi_steps = 1;
    while (counts[(b + hi_steps) % n_theta] == 0) ++hi_steps;
    const std::size_t lo = (b + n_theta - lo_steps) % n_theta;
    const std::size_t hi = (b + hi_steps) % n_theta;
    const std::vector<double> lo_proj = lo_steps > b ? reversed(hist[lo]) : hist[lo];
    const std::vector<double> hi_proj = b + hi_steps >= n_theta ? reversed(hist[hi]) : hist[hi];
    const double t = static_cast<double>(lo_steps) / static_cast<double>(lo_steps + hi_steps);
    for (std::size_t j = 0; j < n_q; ++j) proj[b][j] = (1.0 - t) * lo_proj[j] + t * hi_proj[j];
  }

  WignerGrid out;
  out.x_axis = linspace(options.grid.x_min, options.grid.x_max, options.grid.nx);
  out.p_axis = linspace(options.grid.p_min, options.grid.p_max, options.grid.np);
  out.cutoff = options.cutoff;
  out.sample_count = data.samples.size();
  out.method = "filtered_back_projection";

  // Filtered projections on a t-grid that covers every grid point.
  double t_max = 0.0;
  for (const double x : {options.grid.x_min, options.grid.x_max}) {
    for (const double p : {options.grid.p_min, options.grid.p_max}) {
      t_max = std::max(t_max, std::hypot(x, p));
    }
  }
  const auto half_nt = static_cast<std::ptrdiff_t>(std::ceil(t_max / width)) + 1;
  const std::size_t n_t = static_cast<std::size_t>(2 * half_nt + 1);
  const double t0 = -static_cast<double>(half_nt) * width;

  // Kernel integrated exactly over each histogram bin, indexed by t_i - q_j.
  const auto q_centre = [&](std::size_t j) { return -span + (static_cast<double>(j) + 0.5) * width; };
  std::vector<std::vector<double>> filtered(n_theta, std::vector<double>(n_t, 0.0));
  std::vector<double> weights(n_t * n_q);
  for (std::size_t i = 0; i < n_t; ++i) {
    const double t = t0 + static_cast<double>(i) * width;
    for (std::size_t j = 0; j < n_q; ++j) {
      const double d = t - q_centre(j);
      weights[i * n_q + j] = ramp_antiderivative(d + 0.5 * width, options.cutoff) -
                             ramp_antiderivative(d - 0.5 * width, options.cutoff);
    }
  }
  for (std::size_t b = 0; b < n_theta; ++b) {
    for (std::size_t i = 0; i < n_t; ++i) {
      double acc = 0.0;
      const double* w = &weights[i * n_q];
      for (std::size_t j = 0; j < n_q; ++j) acc += w[j] * proj[b][j];
      filtered[b][i] = acc;
    }
  }

  out.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(options.grid.nx),
                                     static_cast<Eigen::Index>(options.grid.np));
  for (std::size_t b = 0; b < n_theta; ++b) {
    const double theta = static_cast<double>(b) * bin_angle;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const auto& f = filtered[b];
    for (std::size_t i = 0; i < options.grid.nx; ++i) {
      for (std::size_t j = 0; j < options.grid.np; ++j) {
        const double t = out.x_axis[i] * c + out.p_axis[j] * s;
        const double pos = (t - t0) / width;
        const auto k = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(k);
        const double v = k + 1 < n_t ? (1.0 - frac) * f[k] + frac * f[k + 1] : f[n_t - 1];
        out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += bin_angle * v;
      }
    }
  }
  return out;
}

// --- metrics ----------------------------------------------------------------

ReconstructionMetrics reconstruction_error(const WignerGrid& grid, const GaussianState& reference) {
  if (reference.num_modes() != 1) {
    throw std::invalid_argument("reconstruction_error: single-mode reference required");
  }
  ReconstructionMetrics m;
  double l1 = 0.0;
  for (std::size_t i = 0; i < grid.x_axis.size(); ++i) {
    for (std::size_t j = 0; j < grid.p_axis.size(); ++j) {
      const double diff = grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                          wigner_analytic(reference, grid.x_axis[i], grid.p_axis[j]);
      m.max_abs_error = std::max(m.max_abs_error, std::abs(diff));
      l1 += trapezoid_weight(i, grid.x_axis.size()) * trapezoid_weight(j, grid.p_axis.size()) *
            std::abs(diff);
    }
  }
  m.l1_error = l1 * grid.dx() * grid.dp();
  m.integral_deviation = grid.integral() - 1.0;
  const WignerGrid::Moments moments = grid.moments();
  m.mean_delta = moments.mean - reference.mean();
  m.cov_delta = moments.cov - reference.cov();
  m.cov_relative_error = m.cov_delta.cwiseAbs().maxCoeff() / reference.cov().diagonal().maxCoeff();
  return m;
}

bool within_bands(const ReconstructionMetrics& metrics, const QualityBands& bands) {
  return metrics.max_abs_error <= bands.max_abs &&
         std::abs(metrics.integral_deviation) <= bands.integral && metrics.l1_error <= bands.l1;
}

// --- figure 4 ---------------------------------------------------------------

Figure4Result simulate_figure4(const ChainSpec& chain, std::size_t n_samples, Seed seed,
                               const Figure4Options& options) {
  chain.validate();
  if (chain.hops.size() != 2) {
    throw std::invalid_argument("simulate_figure4: two-hop chain required");
  }
  if (n_samples == 0) throw std::invalid_argument("simulate_figure4: n_samples must be >= 1");

  const GaussianState input = make_coherent(options.amplitude * std::cos(options.phase),
                                            options.amplitude * std::sin(options.phase));
  const GaussianState after_one = teleport_analytic(input, chain.hops[0]);
  const GaussianState after_two = teleport_analytic(after_one, chain.hops[1]);

  // Ideal hops (already checked for unity gain above) are the identity and
  // have no finite shot representation, so they are left out of the shot runs.
  const auto stage = [&](std::size_t n_hops, std::uint64_t run_offset, std::uint64_t data_offset,
                         const std::string& label) {
    ChainSpec noisy{{}, chain.label};
    for (std::size_t h = 0; h < n_hops; ++h) {
      if (!chain.hops[h].has_ideal_resource()) noisy.hops.push_back(chain.hops[h]);
    }
    if (noisy.hops.empty()) {
      return acquire(input, n_samples, options.scan, Seed{seed.value + data_offset}, label);
    }
    const ShotEnsemble runs =
        chain_shots(input, noisy, ShotOptions{n_samples, Seed{seed.value + run_offset}});
    return acquire(runs, options.scan, Seed{seed.value + data_offset}, label);
  };

  const TomographyDataset d_in = acquire(input, n_samples, options.scan, seed, "input");
  const TomographyDataset d_one = stage(1, 1, 3, "teleported");
  const TomographyDataset d_two = stage(2, 2, 4, "sequentially teleported");

  return Figure4Result{{input, after_one, after_two},
                       {inverse_radon(d_in, options.reconstruction),
                        inverse_radon(d_one, options.reconstruction),
                        inverse_radon(d_two, options.reconstruction)}};
}

}  // namespace cvtele

#include "cvtele/tomography.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cvtele/dataset_io.hpp"

namespace cvtele {
namespace {

constexpr double kPi = std::numbers::pi;

// Major-axis angle of a 2x2 covariance ellipse, in [0, pi).
double major_axis_angle(const Eigen::Matrix2d& c) {
  double a = 0.5 * std::atan2(2.0 * c(0, 1), c(0, 0) - c(1, 1));
  if (a < 0.0) a += kPi;
  return a;
}

double angle_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kPi);
  return std::min(d, kPi - d);
}

TEST(ScanSpec, UniformGridAndRampPhases) {
  const ScanSpec grid{ScanKind::UniformGrid, 4};
  EXPECT_EQ(grid.phase_for(0, 10), 0.0);
  EXPECT_DOUBLE_EQ(grid.phase_for(5, 10), kPi / 4.0);
  const ScanSpec ramp{ScanKind::Ramp, 0};
  EXPECT_DOUBLE_EQ(ramp.phase_for(5, 10), kPi / 2.0);
  EXPECT_LT(ramp.phase_for(9, 10), kPi);
  EXPECT_EQ(scan_kind_from_string(to_string(ScanKind::Ramp)), ScanKind::Ramp);
  EXPECT_THROW(scan_kind_from_string("sawtooth"), std::invalid_argument);
}

TEST(Acquire, VacuumPooledVariance) {
  const TomographyDataset d = acquire(make_vacuum(1), 100000, {}, Seed{1});
  ASSERT_EQ(d.samples.size(), 100000u);
  double s = 0.0, ss = 0.0;
  for (const auto& x : d.samples) {
    ASSERT_GE(x.phase, 0.0);
    ASSERT_LT(x.phase, kPi);
    s += x.value;
    ss += x.value * x.value;
  }
  const double n = 100000.0;
  const double m = s / n;
  EXPECT_NEAR((ss - n * m * m) / (n - 1.0), 0.25, 5.0 * 0.25 * std::sqrt(2.0 / n));
}

TEST(Acquire, CoherentMeanTracesLockedPhase) {
  const double amp = 1.0;
  const GaussianState c = make_coherent(amp * std::cos(kPi / 4.0), amp * std::sin(kPi / 4.0));
  const std::size_t bins = 18;
  const TomographyDataset d = acquire(c, 90000, {ScanKind::UniformGrid, bins}, Seed{2});
  std::vector<double> sum(bins, 0.0);
  std::vector<double> count(bins, 0.0);
  for (std::size_t k = 0; k < d.samples.size(); ++k) {
    sum[k % bins] += d.samples[k].value;
    count[k % bins] += 1.0;
  }
  for (std::size_t b = 0; b < bins; ++b) {
    const double theta = kPi * static_cast<double>(b) / static_cast<double>(bins);
    EXPECT_NEAR(sum[b] / count[b], amp * std::cos(theta - kPi / 4.0), 5.0 * 0.5 / std::sqrt(count[b]))
        << "bin " << b;
  }
}

TEST(Acquire, SameSeedSameBytes) {
  const GaussianState s = make_squeezed({0.3, 1.2}, Quadrature::X);
  const TomographyDataset a = acquire(s, 2000, {ScanKind::Ramp, 0}, Seed{8}, "sq");
  const TomographyDataset b = acquire(s, 2000, {ScanKind::Ramp, 0}, Seed{8}, "sq");
  EXPECT_EQ(dataset_csv(a), dataset_csv(b));
  const TomographyDataset c = acquire(s, 2000, {ScanKind::Ramp, 0}, Seed{9}, "sq");
  EXPECT_NE(dataset_csv(a), dataset_csv(c));
}

TEST(Acquire, RejectsBadInput) {
  EXPECT_THROW(acquire(make_vacuum(1), 0, {}, Seed{1}), std::invalid_argument);
  EXPECT_THROW(acquire(make_vacuum(2), 10, {}, Seed{1}), std::invalid_argument);
}

TEST(SampleWigner, GridIntegralAndPeak) {
  const WignerGrid g = sample_wigner(make_vacuum(1), {});
  EXPECT_EQ(g.values.rows(), 121);
  EXPECT_EQ(g.values.cols(), 121);
  EXPECT_NEAR(g.integral(), 1.0, 1e-6);
  EXPECT_NEAR(g.max_value(), 2.0 / kPi, 1e-14);
  EXPECT_TRUE(g.peak_location().isZero(1e-12));
}

TEST(ReconstructionError, SelfComparisonIsExact) {
  const GaussianState s = phase_rotate(make_squeezed({0.4, 1.5}, Quadrature::X), 0, 0.6);
  const GaussianState ref = displace(s, 0, 0.5, -0.3);
  const ReconstructionMetrics m = reconstruction_error(sample_wigner(ref, {}), ref);
  EXPECT_LT(m.max_abs_error, 1e-10);
  EXPECT_LT(m.l1_error, 1e-10);
  EXPECT_LT(std::abs(m.integral_deviation), 1e-10);
  EXPECT_LT(m.mean_delta.cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(m.cov_delta.cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_TRUE(within_bands(m));
}

TEST(InverseRadon, VacuumWithinBands) {
  const TomographyDataset d = acquire(make_vacuum(1), 100000, {}, Seed{3});
  const WignerGrid g = inverse_radon(d);
  EXPECT_EQ(g.sample_count, 100000u);
  EXPECT_EQ(g.cutoff, kDefaultCutoff);
  const ReconstructionMetrics m = reconstruction_error(g, make_vacuum(1));
  EXPECT_LE(m.max_abs_error, 0.05);
  EXPECT_LE(std::abs(m.integral_deviation), 0.05);
  EXPECT_NEAR(g.max_value(), 2.0 / kPi, 0.1 * 2.0 / kPi);
  EXPECT_TRUE(within_bands(m));
}

TEST(InverseRadon, CoherentPeakAtMean) {
  const Eigen::Vector2d mean(std::cos(kPi / 4.0), std::sin(kPi / 4.0));
  const TomographyDataset d = acquire(make_coherent(mean(0), mean(1)), 100000, {}, Seed{4});
  const WignerGrid g = inverse_radon(d);
  EXPECT_LT((g.peak_location() - mean).norm(), 0.1);
}

TEST(InverseRadon, TeleportedMomentsMatchAnalytic) {
  const TeleporterConfig cfg = TeleporterConfig::unity({0.35, 1.0});
  const GaussianState in = make_coherent(1.0, 0.5);
  const ShotEnsemble ens = teleport_shots(in, cfg, 100000, Seed{5});
  const WignerGrid g = inverse_radon(acquire(ens, {}, Seed{6}));
  const ReconstructionMetrics m = reconstruction_error(g, teleport_analytic(in, cfg));
  EXPECT_LT(m.cov_relative_error, 0.10);
  EXPECT_LT(m.mean_delta.norm(), 0.05);
}

TEST(InverseRadon, ZeroCutoffIsFlagged) {
  const TomographyDataset d = acquire(make_vacuum(1), 20000, {}, Seed{7});
  ReconstructionOptions opts;
  opts.cutoff = 0.0;
  const ReconstructionMetrics m = reconstruction_error(inverse_radon(d, opts), make_vacuum(1));
  EXPECT_GT(m.l1_error, QualityBands{}.l1);
  EXPECT_FALSE(within_bands(m));
}

TEST(InverseRadon, RejectsPoorPhaseCoverage) {
  // Four distinct phases only.
  const TomographyDataset few = acquire(make_vacuum(1), 4000, {ScanKind::UniformGrid, 4}, Seed{1});
  EXPECT_THROW(inverse_radon(few), std::invalid_argument);

  // Plenty of phases, but nothing in the last quarter turn.
  TomographyDataset gap = acquire(make_vacuum(1), 20000, {ScanKind::Ramp, 0}, Seed{1});
  std::erase_if(gap.samples, [](const HomodyneSample& s) { return s.phase > 0.75 * kPi; });
  EXPECT_THROW(inverse_radon(gap), std::invalid_argument);

  TomographyDataset empty;
  EXPECT_THROW(inverse_radon(empty), std::invalid_argument);
}

TEST(InverseRadon, ToleratesSmallGaps) {
  TomographyDataset d = acquire(make_vacuum(1), 50000, {ScanKind::UniformGrid, 180}, Seed{11});
  // Drop a handful of isolated phase bins; interpolation fills them.
  std::erase_if(d.samples, [](const HomodyneSample& s) {
    const auto b = static_cast<int>(std::lround(s.phase * 180.0 / kPi));
    return b % 30 == 7;
  });
  const ReconstructionMetrics m = reconstruction_error(inverse_radon(d), make_vacuum(1));
  EXPECT_LE(m.max_abs_error, 0.05);
}

TEST(InverseRadon, RampScanReconstructs) {
  const TomographyDataset d = acquire(make_vacuum(1), 100000, {ScanKind::Ramp, 0}, Seed{12});
  const ReconstructionMetrics m = reconstruction_error(inverse_radon(d), make_vacuum(1));
  EXPECT_LE(m.max_abs_error, 0.05);
}

// The p-integral of the reconstruction reproduces the theta = 0 histogram.
TEST(InverseRadon, MarginalMatchesZeroPhaseHistogram) {
  const GaussianState s = make_squeezed({0.3, 1.0}, Quadrature::P);
  const TomographyDataset d = acquire(s, 180000, {}, Seed{13});
  const WignerGrid g = inverse_radon(d);
  const std::vector<double> marginal = g.x_marginal();

  const double lo = -2.0;
  const double width = 0.25;
  const int n_bins = 16;
  std::vector<double> counts(n_bins, 0.0);
  double total = 0.0;
  for (const auto& smp : d.samples) {
    if (smp.phase != 0.0) continue;
    total += 1.0;
    const double pos = (smp.value - lo) / width;
    if (pos >= 0.0 && pos < n_bins) counts[static_cast<std::size_t>(pos)] += 1.0;
  }
  ASSERT_EQ(total, 1000.0);
  for (int b = 0; b < n_bins; ++b) {
    // Average the reconstructed marginal over the histogram bin.
    double acc = 0.0;
    double npts = 0.0;
    for (std::size_t i = 0; i < g.x_axis.size(); ++i) {
      const double x = g.x_axis[i];
      if (x >= lo + b * width - 1e-12 && x <= lo + (b + 1) * width + 1e-12) {
        acc += marginal[i];
        npts += 1.0;
      }
    }
    const double recon = acc / npts;
    const double hist = counts[b] / (total * width);
    const double se = std::sqrt(std::max(counts[b], 1.0)) / (total * width);
    EXPECT_NEAR(recon, hist, 5.0 * se + 0.03) << "bin " << b;
  }
}

TEST(InverseRadon, RotatedStateRotatesReconstruction) {
  const GaussianState base = make_squeezed({0.8, 1.0}, Quadrature::X);
  for (const double phi : {0.0, 0.5, 1.2}) {
    const GaussianState rotated = phase_rotate(base, 0, phi);
    const WignerGrid g = inverse_radon(acquire(rotated, 100000, {}, Seed{20}));
    const double expected = major_axis_angle(rotated.cov());
    EXPECT_LT(angle_distance(major_axis_angle(g.moments().cov), expected), 0.05) << "phi " << phi;
  }
}

TEST(InverseRadon, ErrorShrinksWithSamples) {
  double prev = 1.0;
  for (const std::size_t n : {1000u, 10000u, 100000u}) {
    const WignerGrid g = inverse_radon(acquire(make_vacuum(1), n, {}, Seed{21}));
    const double err = reconstruction_error(g, make_vacuum(1)).max_abs_error;
    EXPECT_LT(err, prev) << n << " samples";
    prev = err;
  }
}

ChainSpec measured_hops() {
  return {{TeleporterConfig::from_output_db(2.5, 2.8), TeleporterConfig::from_output_db(2.3, 2.2)},
          "measured"};
}

TEST(SimulateFigure4, PeaksDecreaseAndStayPut) {
  const ChainSpec chain = measured_hops();
  const Figure4Options opts;
  const Figure4Result r = simulate_figure4(chain, 100000, Seed{30}, opts);
  const Eigen::Vector2d mean(opts.amplitude * std::cos(opts.phase), opts.amplitude * std::sin(opts.phase));
  EXPECT_GT(r.grids[0].max_value(), r.grids[1].max_value());
  EXPECT_GT(r.grids[1].max_value(), r.grids[2].max_value());
  for (const auto& g : r.grids) EXPECT_LT((g.peak_location() - mean).norm(), 0.1);

  const NoiseBudget budget = accumulate_noise(chain);
  const Eigen::Matrix2d c = r.grids[2].moments().cov;
  EXPECT_NEAR(c(0, 0), budget.out_var_x, 0.10 * budget.out_var_x);
  EXPECT_NEAR(c(1, 1), budget.out_var_p, 0.10 * budget.out_var_p);
  EXPECT_TRUE(r.states[2].cov().isApprox(
      Eigen::Vector2d(budget.out_var_x, budget.out_var_p).asDiagonal().toDenseMatrix(), 1e-12));
}

TEST(SimulateFigure4, IdealHopsGiveMatchingGrids) {
  const ChainSpec chain{{TeleporterConfig::unity(SqueezerSpec::ideal()),
                         TeleporterConfig::unity(SqueezerSpec::ideal())},
                        "ideal"};
  const Figure4Result r = simulate_figure4(chain, 100000, Seed{31});
  EXPECT_LT((r.grids[0].values - r.grids[1].values).cwiseAbs().maxCoeff(), 0.05);
  EXPECT_LT((r.grids[0].values - r.grids[2].values).cwiseAbs().maxCoeff(), 0.05);
}

TEST(SimulateFigure4, RequiresTwoHops) {
  const ChainSpec one{{TeleporterConfig::unity({0.5, 1.0})}, "one"};
  EXPECT_THROW(simulate_figure4(one, 1000, Seed{1}), std::invalid_argument);
}

}  // namespace
}  // namespace cvtele

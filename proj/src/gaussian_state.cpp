#include "cvtele/gaussian_state.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <utility>

namespace cvtele {
namespace {

constexpr double kSymmetryTolerance = 1e-10;
constexpr double kSymplecticTolerance = 1e-10;

void require_mode(const GaussianState& state, std::size_t mode, const char* what) {
  if (mode >= state.num_modes()) {
    throw std::out_of_range(std::string(what) + ": mode index " + std::to_string(mode) +
                            " out of range for " + std::to_string(state.num_modes()) +
                            "-mode state");
  }
}

double reduce_phase(double phase, bool& flipped) {
  constexpr double pi = std::numbers::pi;
  double t = std::fmod(phase, 2.0 * pi);
  if (t < 0.0) t += 2.0 * pi;
  flipped = false;
  if (t >= pi) {
    t -= pi;
    flipped = true;
  }
  // fmod can land exactly on pi after the subtraction through rounding.
  if (t >= pi) t = 0.0;
  return t;
}

}  // namespace

// --- SqueezerSpec -----------------------------------------------------------

SqueezerSpec SqueezerSpec::ideal() noexcept {
  return SqueezerSpec{std::numeric_limits<double>::infinity(), 1.0};
}

bool SqueezerSpec::is_ideal() const noexcept { return std::isinf(r) && r > 0.0; }

double SqueezerSpec::squeezed_variance() const noexcept {
  return kVacuumVariance * std::exp(-2.0 * r);
}

double SqueezerSpec::antisqueezed_variance() const noexcept {
  return kVacuumVariance * std::exp(2.0 * r) * excess;
}

void SqueezerSpec::validate() const {
  if (std::isnan(r) || r < 0.0) {
    throw std::invalid_argument("squeezing parameter r must be nonnegative");
  }
  if (!std::isfinite(excess) || excess < 1.0) {
    throw std::invalid_argument("squeezer excess must be >= 1 (1 = pure)");
  }
}

// --- HomodyneSample ---------------------------------------------------------

HomodyneSample HomodyneSample::canonical(double phase, double value) noexcept {
  bool flipped = false;
  const double reduced = reduce_phase(phase, flipped);
  return HomodyneSample{reduced, flipped ? -value : value};
}

// --- GaussianState ----------------------------------------------------------

GaussianState::GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  const auto dim = mean.size();
  if (dim == 0 || dim % 2 != 0) {
    throw std::invalid_argument("mean vector must have positive even length");
  }
  if (cov.rows() != dim || cov.cols() != dim) {
    throw std::invalid_argument("covariance shape does not match mean vector");
  }
  if (!mean.allFinite() || !cov.allFinite()) {
    throw std::invalid_argument("mean and covariance must be finite");
  }
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
    throw std::invalid_argument("covariance matrix is not symmetric");
  }
  cov = 0.5 * (cov + cov.transpose()).eval();
  if (!is_physical_covariance(cov)) {
    throw UnphysicalStateError("covariance violates the uncertainty principle");
  }
  mean_ = std::move(mean);
  cov_ = std::move(cov);
}

GaussianState::GaussianState(Unchecked, Eigen::VectorXd mean, Eigen::MatrixXd cov) noexcept
    : mean_(std::move(mean)), cov_(std::move(cov)) {}

Eigen::Vector2d GaussianState::mode_mean(std::size_t mode) const {
  require_mode(*this, mode, "mode_mean");
  return mean_.segment<2>(2 * static_cast<Eigen::Index>(mode));
}

Eigen::Matrix2d GaussianState::mode_cov(std::size_t mode) const {
  require_mode(*this, mode, "mode_cov");
  const auto i = 2 * static_cast<Eigen::Index>(mode);
  return cov_.block<2, 2>(i, i);
}

GaussianState GaussianState::marginal(std::size_t mode) const {
  return GaussianState(Unchecked{}, mode_mean(mode), mode_cov(mode));
}

GaussianState GaussianState::marginal(std::span<const std::size_t> modes) const {
  if (modes.empty()) {
    throw std::invalid_argument("marginal: at least one mode required");
  }
  const auto dim = 2 * static_cast<Eigen::Index>(modes.size());
  Eigen::VectorXd mean(dim);
  Eigen::MatrixXd cov(dim, dim);
  for (std::size_t a = 0; a < modes.size(); ++a) {
    require_mode(*this, modes[a], "marginal");
    const auto ia = 2 * static_cast<Eigen::Index>(a);
    const auto sa = 2 * static_cast<Eigen::Index>(modes[a]);
    mean.segment<2>(ia) = mean_.segment<2>(sa);
    for (std::size_t b = 0; b < modes.size(); ++b) {
      const auto ib = 2 * static_cast<Eigen::Index>(b);
      const auto sb = 2 * static_cast<Eigen::Index>(modes[b]);
      cov.block<2, 2>(ia, ib) = cov_.block<2, 2>(sa, sb);
    }
  }
  return GaussianState(Unchecked{}, std::move(mean), std::move(cov));
}

GaussianState GaussianState::tensor(const GaussianState& other) const {
  const auto n1 = mean_.size();
  const auto n2 = other.mean_.size();
  Eigen::VectorXd mean(n1 + n2);
  mean << mean_, other.mean_;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
  cov.topLeftCorner(n1, n1) = cov_;
  cov.bottomRightCorner(n2, n2) = other.cov_;
  return GaussianState(Unchecked{}, std::move(mean), std::move(cov));
}

Eigen::VectorXd GaussianState::symplectic_spectrum() const {
  return cvtele::symplectic_spectrum(cov_);
}

bool GaussianState::is_physical(double tol) const { return is_physical_covariance(cov_, tol); }

// --- free functions ---------------------------------------------------------

Eigen::MatrixXd symplectic_form(std::size_t num_modes) {
  const auto dim = 2 * static_cast<Eigen::Index>(num_modes);
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; k += 2) {
    omega(k, k + 1) = 1.0;
    omega(k + 1, k) = -1.0;
  }
  return omega;
}

Eigen::VectorXd symplectic_spectrum(const Eigen::MatrixXd& cov) {
  const auto dim = cov.rows();
  if (dim == 0 || dim % 2 != 0 || cov.cols() != dim) {
    throw std::invalid_argument("covariance must be square with even dimension");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw UnphysicalStateError("covariance matrix is not positive definite");
  }
  const auto n = dim / 2;
  Eigen::VectorXd nu(n);
  if (n == 1) {
    nu(0) = std::sqrt(cov.determinant());
    return nu;
  }
  // With cov = L L^T, i L^T Omega L is Hermitian and shares the spectrum +-nu_k
  // of i Omega cov. The Hermitian solver stays accurate for degenerate pairs,
  // where closed forms built on a discriminant lose half the digits.
  const Eigen::MatrixXd l = llt.matrixL();
  const Eigen::MatrixXd a = l.transpose() * symplectic_form(static_cast<std::size_t>(n)) * l;
  const Eigen::MatrixXcd h = std::complex<double>(0.0, 1.0) * a.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  // Eigenvalues come sorted ascending; the upper half is +nu_k.
  for (Eigen::Index k = 0; k < n; ++k) {
    nu(k) = solver.eigenvalues()(n + k);
  }
  return nu;
}

bool is_physical_covariance(const Eigen::MatrixXd& cov, double tol) {
  try {
    const Eigen::VectorXd nu = symplectic_spectrum(cov);
    return nu.minCoeff() >= kVacuumVariance - tol;
  } catch (const UnphysicalStateError&) {
    return false;
  }
}

GaussianState make_vacuum(std::size_t num_modes) {
  if (num_modes == 0) {
    throw std::invalid_argument("make_vacuum: number of modes must be >= 1");
  }
  const auto dim = 2 * static_cast<Eigen::Index>(num_modes);
  return GaussianState(Eigen::VectorXd::Zero(dim),
                       kVacuumVariance * Eigen::MatrixXd::Identity(dim, dim));
}

GaussianState make_coherent(double alpha_x, double alpha_p) {
  return GaussianState(Eigen::Vector2d(alpha_x, alpha_p),
                       kVacuumVariance * Eigen::MatrixXd::Identity(2, 2));
}

GaussianState make_squeezed(const SqueezerSpec& spec, Quadrature axis) {
  spec.validate();
  if (spec.is_ideal()) {
    throw std::invalid_argument("make_squeezed: infinite squeezing has no finite covariance");
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
  const double sq = spec.squeezed_variance();
  const double anti = spec.antisqueezed_variance();
  if (axis == Quadrature::X) {
    cov(0, 0) = sq;
    cov(1, 1) = anti;
  } else {
    cov(0, 0) = anti;
    cov(1, 1) = sq;
  }
  return GaussianState(Eigen::VectorXd::Zero(2), std::move(cov));
}

GaussianState make_thermal(double variance) {
  if (!(variance >= kVacuumVariance)) {
    throw std::invalid_argument("make_thermal: variance must be >= 1/4");
  }
  return GaussianState(Eigen::VectorXd::Zero(2), variance * Eigen::MatrixXd::Identity(2, 2));
}

GaussianState apply_symplectic(const GaussianState& state, const Eigen::MatrixXd& symplectic) {
  const auto dim = state.mean().size();
  if (symplectic.rows() != dim || symplectic.cols() != dim) {
    throw std::invalid_argument("apply_symplectic: matrix dimension mismatch");
  }
  const Eigen::MatrixXd omega = symplectic_form(state.num_modes());
  if ((symplectic * omega * symplectic.transpose() - omega).cwiseAbs().maxCoeff() >
      kSymplecticTolerance) {
    throw std::invalid_argument("apply_symplectic: matrix is not symplectic");
  }
  Eigen::MatrixXd cov = symplectic * state.cov() * symplectic.transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();
  return GaussianState(GaussianState::Unchecked{}, symplectic * state.mean(), std::move(cov));
}

GaussianState beam_splitter(const GaussianState& state, std::size_t mode_a, std::size_t mode_b,
                            double transmittance) {
  require_mode(state, mode_a, "beam_splitter");
  require_mode(state, mode_b, "beam_splitter");
  if (mode_a == mode_b) {
    throw std::invalid_argument("beam_splitter: modes must differ");
  }
  if (!(transmittance >= 0.0 && transmittance <= 1.0)) {
    throw std::invalid_argument("beam_splitter: transmittance must lie in [0, 1]");
  }
  const double c = std::sqrt(transmittance);
  const double s = std::sqrt(1.0 - transmittance);
  const auto dim = state.mean().size();
  Eigen::MatrixXd bs = Eigen::MatrixXd::Identity(dim, dim);
  const auto a = 2 * static_cast<Eigen::Index>(mode_a);
  const auto b = 2 * static_cast<Eigen::Index>(mode_b);
  for (Eigen::Index q = 0; q < 2; ++q) {
    bs(a + q, a + q) = c;
    bs(a + q, b + q) = s;
    bs(b + q, a + q) = -s;
    bs(b + q, b + q) = c;
  }
  return apply_symplectic(state, bs);
}

GaussianState phase_rotate(const GaussianState& state, std::size_t mode, double angle) {
  require_mode(state, mode, "phase_rotate");
  const auto dim = state.mean().size();
  Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(dim, dim);
  const auto i = 2 * static_cast<Eigen::Index>(mode);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  // Mean (x, p) moves to (x cos - p sin, x sin + p cos).
  rot(i, i) = c;
  rot(i, i + 1) = -s;
  rot(i + 1, i) = s;
  rot(i + 1, i + 1) = c;
  return apply_symplectic(state, rot);
}

GaussianState displace(const GaussianState& state, std::size_t mode, double dx, double dp) {
  require_mode(state, mode, "displace");
  Eigen::VectorXd mean = state.mean();
  const auto i = 2 * static_cast<Eigen::Index>(mode);
  mean(i) += dx;
  mean(i + 1) += dp;
  return GaussianState(GaussianState::Unchecked{}, std::move(mean), state.cov());
}

QuadratureMarginal quadrature_marginal(const GaussianState& state, std::size_t mode, double phase) {
  const Eigen::Vector2d dir(std::cos(phase), std::sin(phase));
  return QuadratureMarginal{dir.dot(state.mode_mean(mode)),
                            dir.dot(state.mode_cov(mode) * dir)};
}

GaussianState homodyne_condition(const GaussianState& state, std::size_t mode, double phase,
                                 double outcome) {
  require_mode(state, mode, "homodyne_condition");
  if (state.num_modes() < 2) {
    throw std::invalid_argument("homodyne_condition: no modes would remain after measurement");
  }
  const Eigen::Vector2d dir(std::cos(phase), std::sin(phase));
  const auto i = 2 * static_cast<Eigen::Index>(mode);
  const auto dim = state.mean().size();

  const double variance = dir.dot(state.cov().block<2, 2>(i, i) * dir);
  if (!(variance > 0.0)) {
    throw UnphysicalStateError("homodyne_condition: measured quadrature variance is not positive");
  }
  const double predicted = dir.dot(state.mean().segment<2>(i));

  // Indices of the remaining quadratures.
  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(dim - 2));
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (k != i && k != i + 1) keep.push_back(k);
  }
  const auto m = static_cast<Eigen::Index>(keep.size());
  Eigen::VectorXd mean(m);
  Eigen::VectorXd cross(m);  // Cov(rest, measured quadrature)
  Eigen::MatrixXd cov(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto ka = keep[static_cast<std::size_t>(a)];
    mean(a) = state.mean()(ka);
    cross(a) = state.cov()(ka, i) * dir(0) + state.cov()(ka, i + 1) * dir(1);
    for (Eigen::Index b = 0; b < m; ++b) {
      cov(a, b) = state.cov()(ka, keep[static_cast<std::size_t>(b)]);
    }
  }
  mean += cross * ((outcome - predicted) / variance);
  cov -= cross * cross.transpose() / variance;
  cov = 0.5 * (cov + cov.transpose()).eval();
  return GaussianState(std::move(mean), std::move(cov));
}

HomodyneDraw homodyne_sample(const GaussianState& state, std::size_t mode, double phase,
                             CounterStream& rng) {
  const QuadratureMarginal marginal = quadrature_marginal(state, mode, phase);
  if (!(marginal.variance > 0.0)) {
    throw UnphysicalStateError("homodyne_sample: measured quadrature variance is not positive");
  }
  const double value = marginal.mean + std::sqrt(marginal.variance) * rng.normal();
  HomodyneDraw draw{HomodyneSample::canonical(phase, value), std::nullopt};
  if (state.num_modes() > 1) {
    draw.remainder = homodyne_condition(state, mode, phase, value);
  }
  return draw;
}

double wigner_analytic(const GaussianState& state, double x, double p) {
  if (state.num_modes() != 1) {
    throw std::invalid_argument("wigner_analytic: single-mode state required");
  }
  const Eigen::Matrix2d sigma = state.cov();
  const double det = sigma.determinant();
  if (!(det > 0.0)) {
    throw UnphysicalStateError("wigner_analytic: singular covariance");
  }
  const Eigen::Vector2d delta = Eigen::Vector2d(x, p) - state.mean();
  const double quad = delta.dot(sigma.inverse() * delta);
  return std::exp(-0.5 * quad) / (2.0 * std::numbers::pi * std::sqrt(det));
}

double overlap_with_coherent(const GaussianState& state, double alpha_x, double alpha_p) {
  if (state.num_modes() != 1) {
    throw std::invalid_argument("overlap_with_coherent: single-mode state required");
  }
  if (!state.is_physical()) {
    throw UnphysicalStateError("overlap_with_coherent: unphysical covariance");
  }
  const Eigen::Matrix2d sum =
      state.cov() + kVacuumVariance * Eigen::Matrix2d::Identity();
  const Eigen::Vector2d delta = state.mean() - Eigen::Vector2d(alpha_x, alpha_p);
  const double quad = delta.dot(sum.inverse() * delta);
  return std::exp(-0.5 * quad) / (2.0 * std::sqrt(sum.determinant()));
}

}  // namespace cvtele

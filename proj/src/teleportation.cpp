#include "cvtele/teleportation.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cvtele {
namespace {

constexpr std::uint64_t kVerifierStreamOffset = 1ULL << 63;

SqueezerSpec spec_for_noise(double delta, double excess) {
  if (!(delta >= 0.0 && delta <= 0.5)) {
    throw std::invalid_argument(
        "added noise must lie in [0, 1/2]; 1/2 is the unentangled (r = 0) limit");
  }
  if (delta == 0.0) {
    SqueezerSpec s = SqueezerSpec::ideal();
    s.excess = excess;
    return s;
  }
  // Var(x_A - x_B) = 2 * (1/4) e^{-2r}.
  return SqueezerSpec{-0.5 * std::log(2.0 * delta), excess};
}

}  // namespace

double variance_to_db(double variance) {
  if (!(variance > 0.0)) {
    throw std::invalid_argument("variance_to_db: variance must be positive");
  }
  return 10.0 * std::log10(variance / kVacuumVariance);
}

double db_to_variance(double db) { return kVacuumVariance * std::pow(10.0, db / 10.0); }

double added_noise_from_db(double db) { return db_to_variance(db) - kVacuumVariance; }

// --- TeleporterConfig -------------------------------------------------------

TeleporterConfig TeleporterConfig::unity(const SqueezerSpec& spec) {
  return TeleporterConfig{{spec, spec}, 1.0, 1.0};
}

TeleporterConfig TeleporterConfig::from_added_noise(const AddedNoise& noise, double excess) {
  return TeleporterConfig{{spec_for_noise(noise.delta_x, excess), spec_for_noise(noise.delta_p, excess)},
                          1.0, 1.0};
}

TeleporterConfig TeleporterConfig::from_output_db(double db_x, double db_p, double excess) {
  return from_added_noise(AddedNoise{added_noise_from_db(db_x), added_noise_from_db(db_p)}, excess);
}

bool TeleporterConfig::has_ideal_resource() const noexcept {
  return resource[0].is_ideal() || resource[1].is_ideal();
}

void TeleporterConfig::validate() const {
  resource[0].validate();
  resource[1].validate();
  if (!std::isfinite(g_x) || !std::isfinite(g_p)) {
    throw std::invalid_argument("teleporter gains must be finite");
  }
}

// --- resources --------------------------------------------------------------

GaussianState make_epr(const EprResource& resource) {
  resource[0].validate();
  resource[1].validate();
  // Mode 0 x-squeezed, mode 1 p-squeezed; the splitter maps them to
  // A = (0 + 1)/sqrt2, B = (1 - 0)/sqrt2, so x_A - x_B = sqrt2 x_0 and
  // p_A + p_B = sqrt2 p_1.
  const GaussianState pair =
      make_squeezed(resource[0], Quadrature::X).tensor(make_squeezed(resource[1], Quadrature::P));
  return beam_splitter(pair, 0, 1, 0.5);
}

AddedNoise epr_correlation_noise(const GaussianState& state, std::size_t mode_a, std::size_t mode_b) {
  if (mode_a >= state.num_modes() || mode_b >= state.num_modes() || mode_a == mode_b) {
    throw std::out_of_range("epr_correlation_noise: invalid mode pair");
  }
  const auto a = 2 * static_cast<Eigen::Index>(mode_a);
  const auto b = 2 * static_cast<Eigen::Index>(mode_b);
  const auto& c = state.cov();
  return AddedNoise{c(a, a) + c(b, b) - 2.0 * c(a, b),
                    c(a + 1, a + 1) + c(b + 1, b + 1) + 2.0 * c(a + 1, b + 1)};
}

AddedNoise resource_noise(const EprResource& resource) {
  resource[0].validate();
  resource[1].validate();
  if (!resource[0].is_ideal() && !resource[1].is_ideal()) {
    return epr_correlation_noise(make_epr(resource), 0, 1);
  }
  // An ideal squeezer contributes no noise to its own correlation; the other
  // correlation depends only on the other squeezer.
  const auto component = [](const SqueezerSpec& s) {
    return s.is_ideal() ? 0.0 : 2.0 * s.squeezed_variance();
  };
  return AddedNoise{component(resource[0]), component(resource[1])};
}

// --- shot-level protocol ----------------------------------------------------

JointBellResult bell_measure_modes(const GaussianState& state, std::size_t in_mode,
                                   std::size_t a_mode, CounterStream& rng) {
  if (in_mode == a_mode || in_mode >= state.num_modes() || a_mode >= state.num_modes()) {
    throw std::out_of_range("bell_measure: invalid mode pair");
  }
  if (state.num_modes() < 3) {
    throw std::invalid_argument("bell_measure: joint state needs a mode to keep");
  }
  // a-slot becomes (in + a)/sqrt2, in-slot becomes (in - a)/sqrt2.
  const GaussianState mixed = beam_splitter(state, a_mode, in_mode, 0.5);
  HomodyneDraw x_draw = homodyne_sample(mixed, in_mode, 0.0, rng);
  const std::size_t v_slot = a_mode > in_mode ? a_mode - 1 : a_mode;
  HomodyneDraw p_draw = homodyne_sample(*x_draw.remainder, v_slot, std::numbers::pi / 2.0, rng);
  return JointBellResult{BellOutcome{x_draw.sample.value, p_draw.sample.value},
                         std::move(*p_draw.remainder)};
}

BellResult bell_measure(const GaussianState& input, const GaussianState& epr, CounterStream& rng) {
  if (input.num_modes() != 1) {
    throw std::invalid_argument("bell_measure: input must be a single mode");
  }
  if (epr.num_modes() != 2) {
    throw std::invalid_argument("bell_measure: EPR resource must have two modes");
  }
  JointBellResult joint = bell_measure_modes(input.tensor(epr), 0, 1, rng);
  return BellResult{joint.outcome, std::move(joint.remainder)};
}

GaussianState feedforward_mode(const GaussianState& state, std::size_t mode,
                               const BellOutcome& outcome, const Gains& gains) {
  return displace(state, mode, std::numbers::sqrt2 * gains.g_x * outcome.x_u,
                  std::numbers::sqrt2 * gains.g_p * outcome.p_v);
}

GaussianState feedforward(const GaussianState& bob, const BellOutcome& outcome,
                          const TeleporterConfig& cfg) {
  if (bob.num_modes() != 1) {
    throw std::invalid_argument("feedforward: Bob's state must be a single mode");
  }
  return feedforward_mode(bob, 0, outcome, Gains{cfg.g_x, cfg.g_p});
}

// --- analytic protocol ------------------------------------------------------

GaussianState teleport_modes(const GaussianState& state, std::size_t in_mode, std::size_t a_mode,
                             std::size_t b_mode, const Gains& gains) {
  const std::size_t n = state.num_modes();
  if (in_mode >= n || a_mode >= n || b_mode >= n || in_mode == a_mode || in_mode == b_mode ||
      a_mode == b_mode) {
    throw std::out_of_range("teleport_modes: invalid mode triple");
  }
  const auto dim_in = static_cast<Eigen::Index>(2 * n);
  const auto dim_out = static_cast<Eigen::Index>(2 * (n - 2));
  Eigen::MatrixXd map = Eigen::MatrixXd::Zero(dim_out, dim_in);
  Eigen::Index row = 0;
  for (std::size_t m = 0; m < n; ++m) {
    if (m == in_mode || m == a_mode) continue;
    const auto col = static_cast<Eigen::Index>(2 * m);
    map(row, col) = 1.0;
    map(row + 1, col + 1) = 1.0;
    if (m == b_mode) {
      const auto ci = static_cast<Eigen::Index>(2 * in_mode);
      const auto ca = static_cast<Eigen::Index>(2 * a_mode);
      map(row, ci) += gains.g_x;
      map(row, ca) -= gains.g_x;
      map(row + 1, ci + 1) += gains.g_p;
      map(row + 1, ca + 1) += gains.g_p;
    }
    row += 2;
  }
  Eigen::MatrixXd cov = map * state.cov() * map.transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();
  return GaussianState(map * state.mean(), std::move(cov));
}

GaussianState teleport_analytic(const GaussianState& input, const TeleporterConfig& cfg) {
  if (input.num_modes() != 1) {
    throw std::invalid_argument("teleport_analytic: input must be a single mode");
  }
  cfg.validate();
  if (cfg.has_ideal_resource()) {
    if (cfg.g_x != 1.0 || cfg.g_p != 1.0) {
      throw std::invalid_argument(
          "teleport_analytic: an ideal resource has unbounded noise away from unity gain");
    }
    const AddedNoise noise = resource_noise(cfg.resource);
    Eigen::MatrixXd cov = input.cov();
    cov(0, 0) += noise.delta_x;
    cov(1, 1) += noise.delta_p;
    return GaussianState(input.mean(), std::move(cov));
  }
  return teleport_modes(input.tensor(make_epr(cfg.resource)), 0, 1, 2, Gains{cfg.g_x, cfg.g_p});
}

// --- shot ensembles ---------------------------------------------------------

Eigen::VectorXd ShotEnsemble::mean() const {
  if (outputs.empty()) throw std::logic_error("ShotEnsemble::mean: empty ensemble");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(outputs.front().mean().size());
  for (const auto& s : outputs) acc += s.mean();
  return acc / static_cast<double>(outputs.size());
}

Eigen::MatrixXd ShotEnsemble::covariance() const {
  const Eigen::VectorXd mu = mean();
  const auto dim = mu.size();
  Eigen::MatrixXd avg_cov = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& s : outputs) {
    avg_cov += s.cov();
    const Eigen::VectorXd d = s.mean() - mu;
    scatter += d * d.transpose();
  }
  const auto n = static_cast<double>(outputs.size());
  avg_cov /= n;
  if (outputs.size() > 1) scatter /= (n - 1.0);
  return avg_cov + scatter;
}

GaussianState ShotEnsemble::moment_state() const { return GaussianState(mean(), covariance()); }

double ShotEnsemble::average_overlap(double alpha_x, double alpha_p) const {
  if (outputs.empty()) throw std::logic_error("ShotEnsemble::average_overlap: empty ensemble");
  double acc = 0.0;
  for (const auto& s : outputs) acc += overlap_with_coherent(s, alpha_x, alpha_p);
  return acc / static_cast<double>(outputs.size());
}

std::vector<double> measure_ensemble(const ShotEnsemble& ensemble, double phase, Seed seed) {
  std::vector<double> values;
  values.reserve(ensemble.size());
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    CounterStream rng(seed, kVerifierStreamOffset + k);
    const QuadratureMarginal m = quadrature_marginal(ensemble.outputs[k], 0, phase);
    values.push_back(m.mean + std::sqrt(m.variance) * rng.normal());
  }
  return values;
}

ShotEnsemble teleport_shots(const GaussianState& input, const TeleporterConfig& cfg,
                            std::size_t n_shots, Seed seed) {
  if (n_shots == 0) {
    throw std::invalid_argument("teleport_shots: n_shots must be >= 1");
  }
  if (input.num_modes() != 1) {
    throw std::invalid_argument("teleport_shots: input must be a single mode");
  }
  cfg.validate();
  if (cfg.has_ideal_resource()) {
    throw std::invalid_argument(
        "teleport_shots: an ideal resource has no finite shot representation; use analytic mode");
  }
  const GaussianState epr = make_epr(cfg.resource);
  ShotEnsemble ensemble;
  ensemble.outputs.reserve(n_shots);
  ensemble.bell_log.assign(1, {});
  ensemble.bell_log[0].reserve(n_shots);
  for (std::size_t k = 0; k < n_shots; ++k) {
    CounterStream rng(seed, k);
    BellResult bell = bell_measure(input, epr, rng);
    ensemble.outputs.push_back(feedforward(bell.bob, bell.outcome, cfg));
    ensemble.bell_log[0].push_back(bell.outcome);
  }
  return ensemble;
}

Gains calibrate_gain(const Eigen::Vector2d& measured_out_mean, const Eigen::Vector2d& in_mean) {
  if (in_mean.x() == 0.0) {
    throw std::domain_error("calibrate_gain: input x mean is zero, g_x undefined");
  }
  if (in_mean.y() == 0.0) {
    throw std::domain_error("calibrate_gain: input p mean is zero, g_p undefined");
  }
  return Gains{measured_out_mean.x() / in_mean.x(), measured_out_mean.y() / in_mean.y()};
}

bool is_unity_gain(const Gains& gains, double tolerance) {
  return std::abs(gains.g_x - 1.0) <= tolerance && std::abs(gains.g_p - 1.0) <= tolerance;
}

}  // namespace cvtele

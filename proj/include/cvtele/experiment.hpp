#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cvtele/chain.hpp"
#include "cvtele/teleportation.hpp"
#include "cvtele/tomography.hpp"

namespace cvtele {

enum class Scenario { Teleport, Chain, Swap, Tomography, Figure4, Thresholds };

std::string to_string(Scenario s);
std::optional<Scenario> scenario_from_string(std::string_view name);

/// One teleporter. Either `r` (both resource squeezers, `excess` on the
/// antisqueezed quadrature) or the measured output levels `db_x`/`db_p`
/// relative to the vacuum, not both.
struct HopConfig {
  std::optional<double> r;
  double excess = 1.0;
  std::optional<double> db_x;
  std::optional<double> db_p;
  double g_x = 1.0;
  double g_p = 1.0;

  TeleporterConfig to_teleporter() const;
};

struct InputConfig {
  double amplitude = 1.5;
  double phase_deg = 45.0;

  GaussianState state() const;
};

struct SwapConfig {
  double r = 0.1;
  /// Unset means scan the default gain grid.
  std::optional<double> gain;
};

struct ThresholdConfig {
  std::vector<std::size_t> hops = {1, 2, 3, 4, 5};
  double target_fidelity = kClassicalFidelity;
};

struct TomographyConfig {
  /// "input", "teleported" (after hop 1) or "chain" (after every hop).
  std::string target = "chain";
  ScanSpec scan{};
  ReconstructionOptions reconstruction{};
};

struct OutputConfig {
  std::optional<std::string> dir;
  std::string report = "report.json";
  bool datasets = false;
  bool grids = true;
};

struct Diagnostic {
  std::string field;
  std::string message;

  std::string to_string() const { return field + ": " + message; }
};

struct ExperimentConfig {
  Scenario scenario = Scenario::Chain;
  std::uint64_t seed = 1;
  RunMode mode = RunMode::Analytic;
  std::size_t n_samples = 100000;
  InputConfig input{};
  std::vector<HopConfig> hops;
  SwapConfig swap{};
  ThresholdConfig thresholds{};
  TomographyConfig tomography{};
  OutputConfig output{};

  /// The two-hop experiment: hops fit to output levels of 2.5/2.8 dB and
  /// 2.3/2.2 dB above vacuum.
  static ExperimentConfig two_hop_default();

  /// Physicality and consistency checks; empty when runnable.
  std::vector<Diagnostic> validate() const;

  ChainSpec chain_spec() const;
};

struct ParsedConfig {
  ExperimentConfig config;
  /// Syntax errors, unknown fields and type mismatches.
  std::vector<Diagnostic> schema_errors;
};

ParsedConfig parse_config(std::string_view toml_text);
/// Throws std::runtime_error when the file cannot be read.
ParsedConfig load_config(const std::filesystem::path& path);

/// Schema errors followed by validate() diagnostics (the latter only when the
/// schema is clean).
std::vector<Diagnostic> diagnose(const ParsedConfig& parsed);

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

struct RunOutcome {
  nlohmann::ordered_json report;
  /// Files written, relative to the output directory. The report comes first.
  std::vector<std::string> files;
};

/// Runs the scenario and writes the report plus any artifacts under
/// `out_dir`. Throws ConfigError when validate() reports problems.
RunOutcome run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace cvtele

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cvtele/experiment.hpp"

namespace {

enum ExitCode { kOk = 0, kRuntimeError = 1, kInvalidConfig = 2, kUnphysical = 3 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string scenario;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config,config", o.config, "TOML experiment config");
  cmd->add_option("--seed", o.seed, "Seed (overrides the config)");
  cmd->add_option("--scenario", o.scenario,
                  "teleport | chain | swap | tomography | figure4 | thresholds (overrides the config)");
  cmd->add_flag("--quiet,-q", o.quiet, "Only print errors");
}

void print_diagnostics(const std::vector<cvtele::Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << "  " << d.to_string() << "\n";
}

// Loads the config (or the built-in default) and applies flag overrides.
// Returns the diagnostics; the config is filled in either way.
std::vector<cvtele::Diagnostic> resolve(const Options& o, cvtele::ExperimentConfig& config) {
  cvtele::ParsedConfig parsed;
  if (o.config.empty()) {
    parsed.config = cvtele::ExperimentConfig::two_hop_default();
  } else {
    parsed = cvtele::load_config(o.config);
  }
  if (!parsed.schema_errors.empty()) return parsed.schema_errors;
  config = parsed.config;
  if (o.seed) config.seed = *o.seed;
  if (!o.scenario.empty()) {
    const auto s = cvtele::scenario_from_string(o.scenario);
    if (!s) return {{"--scenario", "unknown scenario '" + o.scenario + "'"}};
    config.scenario = *s;
  }
  return config.validate();
}

std::string output_dir(const Options& o, const cvtele::ExperimentConfig& config) {
  if (!o.out.empty()) return o.out;
  if (config.output.dir) return *config.output.dir;
  if (const char* env = std::getenv("CV_TELELAB_OUT"); env && *env) return env;
  return "cvtelelab-out";
}

int cmd_validate(const Options& o) {
  if (o.config.empty()) {
    std::cerr << "validate: a config file is required\n";
    return kRuntimeError;
  }
  cvtele::ExperimentConfig config;
  const auto diags = resolve(o, config);
  if (!diags.empty()) {
    std::cerr << o.config << ": " << diags.size() << " problem(s)\n";
    print_diagnostics(diags);
    return kInvalidConfig;
  }
  if (!o.quiet) std::cout << o.config << ": ok\n";
  return kOk;
}

int cmd_run(const Options& o) {
  cvtele::ExperimentConfig config;
  const auto diags = resolve(o, config);
  if (!diags.empty()) {
    std::cerr << "invalid configuration\n";
    print_diagnostics(diags);
    return kInvalidConfig;
  }
  const std::string dir = output_dir(o, config);
  const cvtele::RunOutcome outcome = cvtele::run_experiment(config, dir);
  if (!o.quiet) {
    std::cout << "scenario " << cvtele::to_string(config.scenario) << ", seed " << config.seed << "\n";
    for (const auto& f : outcome.files) std::cout << "wrote " << (std::filesystem::path(dir) / f).string() << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-variable teleportation lab"};
  app.require_subcommand(1);

  Options run_opts;
  CLI::App* run = app.add_subcommand("run", "Run a scenario and write a JSON report");
  add_common(run, run_opts);
  run->add_option("--out", run_opts.out, "Output directory (default: config, then $CV_TELELAB_OUT)");

  Options validate_opts;
  CLI::App* validate = app.add_subcommand("validate", "Check a config file without running it");
  add_common(validate, validate_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opts);
    return cmd_validate(validate_opts);
  } catch (const cvtele::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kInvalidConfig;
  } catch (const cvtele::UnphysicalStateError& e) {
    std::cerr << "unphysical state: " << e.what() << "\n";
    return kUnphysical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

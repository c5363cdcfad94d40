#include "cvtele/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "cvtele/dataset_io.hpp"

namespace cvtele {
namespace {

using ojson = nlohmann::ordered_json;

constexpr double kPi = std::numbers::pi;
// Highest output level a unity-gain hop can reach with a nonnegative r:
// delta = 1/2, i.e. 0.75 total variance.
const double kMaxHopDb = 10.0 * std::log10(3.0);

const std::map<std::string, Scenario, std::less<>> kScenarios = {
    {"teleport", Scenario::Teleport}, {"chain", Scenario::Chain},
    {"swap", Scenario::Swap},         {"tomography", Scenario::Tomography},
    {"figure4", Scenario::Figure4},   {"thresholds", Scenario::Thresholds},
};

// --- TOML schema walker -------------------------------------------------------

class TableReader {
 public:
  TableReader(const toml::table& table, std::string prefix, std::vector<Diagnostic>& errors)
      : table_(table), prefix_(std::move(prefix)), errors_(errors) {}

  /// Reports every key of the table that was never asked for.
  void finish() {
    for (auto&& [key, node] : table_) {
      if (!seen_.contains(std::string(key.str()))) {
        errors_.push_back({path(key.str()), "unknown field"});
      }
    }
  }

  TableReader(const TableReader&) = delete;
  TableReader& operator=(const TableReader&) = delete;

  std::optional<double> number(std::string_view key) {
    const toml::node* n = get(key);
    if (!n) return std::nullopt;
    if (n->is_integer() || n->is_floating_point()) return n->value<double>();
    errors_.push_back({path(key), "expected a number"});
    return std::nullopt;
  }

  std::optional<std::int64_t> integer(std::string_view key) {
    const toml::node* n = get(key);
    if (!n) return std::nullopt;
    if (n->is_integer()) return n->value<std::int64_t>();
    errors_.push_back({path(key), "expected an integer"});
    return std::nullopt;
  }

  std::optional<std::size_t> count(std::string_view key) {
    const auto v = integer(key);
    if (!v) return std::nullopt;
    if (*v < 0) {
      errors_.push_back({path(key), "must be nonnegative"});
      return std::nullopt;
    }
    return static_cast<std::size_t>(*v);
  }

  std::optional<std::string> string(std::string_view key) {
    const toml::node* n = get(key);
    if (!n) return std::nullopt;
    if (n->is_string()) return n->value<std::string>();
    errors_.push_back({path(key), "expected a string"});
    return std::nullopt;
  }

  std::optional<bool> boolean(std::string_view key) {
    const toml::node* n = get(key);
    if (!n) return std::nullopt;
    if (n->is_boolean()) return n->value<bool>();
    errors_.push_back({path(key), "expected true or false"});
    return std::nullopt;
  }

  const toml::table* table(std::string_view key) {
    const toml::node* n = get(key);
    if (!n) return nullptr;
    if (const auto* t = n->as_table()) return t;
    errors_.push_back({path(key), "expected a table"});
    return nullptr;
  }

  const toml::array* array(std::string_view key) {
    const toml::node* n = get(key);
    if (!n) return nullptr;
    if (const auto* a = n->as_array()) return a;
    errors_.push_back({path(key), "expected an array"});
    return nullptr;
  }

  std::string path(std::string_view key) const {
    return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key);
  }

 private:
  const toml::node* get(std::string_view key) {
    seen_.insert(std::string(key));
    return table_.get(key);
  }

  const toml::table& table_;
  std::string prefix_;
  std::vector<Diagnostic>& errors_;
  std::set<std::string> seen_;
};

HopConfig read_hop(const toml::table& t, const std::string& prefix, std::vector<Diagnostic>& errors) {
  TableReader r(t, prefix, errors);
  HopConfig hop;
  hop.r = r.number("r");
  if (auto v = r.number("excess")) hop.excess = *v;
  hop.db_x = r.number("db_x");
  hop.db_p = r.number("db_p");
  if (auto v = r.number("g_x")) hop.g_x = *v;
  if (auto v = r.number("g_p")) hop.g_p = *v;
  r.finish();
  return hop;
}

void read_tomography(TableReader& root, TomographyConfig& tomo, std::vector<Diagnostic>& errors) {
  const toml::table* t = root.table("tomography");
  if (!t) return;
  TableReader r(*t, "tomography", errors);
  if (auto v = r.string("target")) tomo.target = *v;
  if (auto v = r.string("scan")) {
    try {
      tomo.scan.kind = scan_kind_from_string(*v);
    } catch (const std::invalid_argument&) {
      errors.push_back({"tomography.scan", "expected \"uniform_grid\" or \"ramp\""});
    }
  }
  if (auto v = r.count("scan_bins")) tomo.scan.bins = *v;
  auto& rec = tomo.reconstruction;
  if (auto v = r.number("cutoff")) rec.cutoff = *v;
  if (auto v = r.count("phase_bins")) rec.phase_bins = *v;
  if (auto v = r.count("quadrature_bins")) rec.quadrature_bins = *v;
  if (auto v = r.number("quadrature_span")) rec.quadrature_span = *v;
  if (auto v = r.number("grid_min")) rec.grid.x_min = rec.grid.p_min = *v;
  if (auto v = r.number("grid_max")) rec.grid.x_max = rec.grid.p_max = *v;
  if (auto v = r.count("grid_points")) rec.grid.nx = rec.grid.np = *v;
  r.finish();
}

bool needs_hops(const ExperimentConfig& c) {
  switch (c.scenario) {
    case Scenario::Teleport:
    case Scenario::Chain:
    case Scenario::Figure4:
      return true;
    case Scenario::Tomography:
      return c.tomography.target != "input";
    default:
      return false;
  }
}

// --- report helpers -----------------------------------------------------------

ojson state_json(const GaussianState& s) {
  const Eigen::Matrix2d c = s.cov();
  return ojson{{"mean", {s.mean()(0), s.mean()(1)}},
               {"var_x", c(0, 0)},
               {"var_p", c(1, 1)},
               {"cov_xp", c(0, 1)},
               {"db_x", variance_to_db(c(0, 0))},
               {"db_p", variance_to_db(c(1, 1))}};
}

ojson noise_json(const AddedNoise& n) { return ojson{{"delta_x", n.delta_x}, {"delta_p", n.delta_p}}; }

ojson fidelity_json(const FidelityReport& f) {
  return ojson{{"per_hop_F", f.per_hop_F},
               {"chain_F", f.chain_F},
               {"beats_classical", f.beats_classical},
               {"classical_margin", f.classical_margin},
               {"beats_no_cloning", f.beats_no_cloning},
               {"no_cloning_margin", f.no_cloning_margin}};
}

ojson budget_json(const NoiseBudget& b) {
  ojson per_hop = ojson::array();
  for (const auto& n : b.per_hop) per_hop.push_back(noise_json(n));
  return ojson{{"per_hop", per_hop},
               {"totals", noise_json(b.totals)},
               {"out_var_x", b.out_var_x},
               {"out_var_p", b.out_var_p},
               {"out_db_x", b.out_db_x},
               {"out_db_p", b.out_db_p}};
}

ojson grid_summary_json(const WignerGrid& g, const GaussianState& reference) {
  const ReconstructionMetrics m = reconstruction_error(g, reference);
  const WignerGrid::Moments mo = g.moments();
  const Eigen::Vector2d peak = g.peak_location();
  return ojson{{"sample_count", g.sample_count},
               {"cutoff", g.cutoff},
               {"peak_value", g.max_value()},
               {"peak_location", {peak(0), peak(1)}},
               {"integral", g.integral()},
               {"moments",
                {{"mean", {mo.mean(0), mo.mean(1)}},
                 {"var_x", mo.cov(0, 0)},
                 {"var_p", mo.cov(1, 1)},
                 {"cov_xp", mo.cov(0, 1)}}},
               {"reference", state_json(reference)},
               {"errors",
                {{"max_abs", m.max_abs_error},
                 {"l1", m.l1_error},
                 {"integral_deviation", m.integral_deviation},
                 {"cov_relative", m.cov_relative_error},
                 {"within_bands", within_bands(m)}}}};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void grid(const WignerGrid& g, const std::string& stem) {
    write_grid_json(g, dir_ / (stem + ".json"));
    write_grid_csv(g, dir_ / (stem + ".csv"));
    files_.push_back(stem + ".json");
    files_.push_back(stem + ".csv");
  }

  void dataset(const TomographyDataset& d, const std::string& stem) {
    write_dataset(d, dir_ / (stem + ".csv"), dir_ / (stem + ".meta.json"));
    files_.push_back(stem + ".csv");
    files_.push_back(stem + ".meta.json");
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

// --- scenarios ------------------------------------------------------------------

ojson run_teleport(const ExperimentConfig& c) {
  const GaussianState input = c.input.state();
  const Eigen::Vector2d in_mean = input.mean();
  ojson hops = ojson::array();
  for (std::size_t h = 0; h < c.hops.size(); ++h) {
    const TeleporterConfig cfg = c.hops[h].to_teleporter();
    ojson entry{{"hop", h + 1}, {"added_noise", noise_json(resource_noise(cfg.resource))}};
    if (c.mode == RunMode::Analytic) {
      const GaussianState out = teleport_analytic(input, cfg);
      entry["output"] = state_json(out);
      entry["fidelity"] = overlap_with_coherent(out, in_mean(0), in_mean(1));
    } else {
      const ShotEnsemble ens = teleport_shots(input, cfg, c.n_samples, Seed{c.seed + h});
      entry["output"] = state_json(ens.moment_state());
      entry["fidelity"] = ens.average_overlap(in_mean(0), in_mean(1));
      const Eigen::VectorXd out_mean = ens.mean();
      entry["measured_gain"] = {
          {"g_x", in_mean(0) != 0.0 ? ojson(out_mean(0) / in_mean(0)) : ojson(nullptr)},
          {"g_p", in_mean(1) != 0.0 ? ojson(out_mean(1) / in_mean(1)) : ojson(nullptr)}};
    }
    const double f = entry["fidelity"].get<double>();
    entry["beats_classical"] = f > kClassicalFidelity;
    entry["classical_margin"] = f - kClassicalFidelity;
    entry["beats_no_cloning"] = f > kNoCloningFidelity;
    entry["no_cloning_margin"] = f - kNoCloningFidelity;
    hops.push_back(std::move(entry));
  }
  return ojson{{"input", state_json(input)}, {"hops", hops}};
}

ojson run_chain_scenario(const ExperimentConfig& c) {
  const GaussianState input = c.input.state();
  const ChainResult res =
      run_chain(input, c.chain_spec(), c.mode, ShotOptions{c.n_samples, Seed{c.seed}});
  return ojson{{"input", state_json(input)},
               {"n_hops", c.hops.size()},
               {"noise_budget", budget_json(res.budget)},
               {"output", state_json(res.output)},
               {"fidelity", fidelity_json(res.fidelity)}};
}

ojson run_swap(const ExperimentConfig& c) {
  const GaussianState input = c.input.state();
  ojson out{{"r", c.swap.r}};
  double gain = 0.0;
  if (c.swap.gain) {
    gain = *c.swap.gain;
    out["gain_source"] = "config";
  } else {
    const GainScan scan = scan_swap_gain(input, c.swap.r);
    gain = scan.best.gain;
    out["gain_source"] = "scan";
    ojson points = ojson::array();
    for (const auto& p : scan.points) points.push_back({p.gain, p.fidelity});
    out["scan"] = {{"grid_min", scan.points.front().gain},
                   {"grid_max", scan.points.back().gain},
                   {"points", points}};
  }
  out["gain"] = gain;
  const SwapResult res = swap_then_teleport(input, c.swap.r, gain, c.mode,
                                            ShotOptions{c.n_samples, Seed{c.seed}});
  out["output"] = state_json(res.output);
  out["fidelity"] = fidelity_json(res.fidelity);
  const double seq = sequential_fidelity_ideal(2, c.swap.r);
  out["sequential_two_hop"] = {{"chain_F", seq},
                               {"beats_classical", seq > kClassicalFidelity},
                               {"classical_margin", seq - kClassicalFidelity}};
  return out;
}

ojson run_thresholds(const ExperimentConfig& c) {
  ojson rows = ojson::array();
  for (const std::size_t n : c.thresholds.hops) {
    const double r = threshold_squeezing(n, c.thresholds.target_fidelity);
    rows.push_back({{"n", n},
                    {"r_star", r},
                    {"squeezing_db", 20.0 * r / std::log(10.0)},
                    {"needs_entanglement", r > 0.0}});
  }
  return ojson{{"target_fidelity", c.thresholds.target_fidelity}, {"thresholds", rows}};
}

// Dataset of `n` fresh protocol runs through the non-ideal hops among the
// first `n_hops`. Ideal unity-gain hops are the identity.
TomographyDataset staged_dataset(const ExperimentConfig& c, std::size_t n_hops, Seed run_seed,
                                 Seed data_seed, const std::string& label) {
  const GaussianState input = c.input.state();
  ChainSpec noisy{{}, "tomography"};
  for (std::size_t h = 0; h < n_hops; ++h) {
    const TeleporterConfig cfg = c.hops[h].to_teleporter();
    if (!cfg.has_ideal_resource()) noisy.hops.push_back(cfg);
  }
  if (noisy.hops.empty()) return acquire(input, c.n_samples, c.tomography.scan, data_seed, label);
  const ShotEnsemble runs = chain_shots(input, noisy, ShotOptions{c.n_samples, run_seed});
  return acquire(runs, c.tomography.scan, data_seed, label);
}

ojson run_tomography(const ExperimentConfig& c, ArtifactWriter& artifacts) {
  const std::string& target = c.tomography.target;
  const std::size_t n_hops = target == "input" ? 0 : target == "teleported" ? 1 : c.hops.size();
  GaussianState reference = c.input.state();
  for (std::size_t h = 0; h < n_hops; ++h) reference = teleport_analytic(reference, c.hops[h].to_teleporter());

  const TomographyDataset data =
      staged_dataset(c, n_hops, Seed{c.seed}, Seed{c.seed + 1}, target);
  const WignerGrid grid = inverse_radon(data, c.tomography.reconstruction);
  if (c.output.datasets) artifacts.dataset(data, "dataset");
  if (c.output.grids) artifacts.grid(grid, "wigner");
  return ojson{{"target", target},
               {"n_hops", n_hops},
               {"scan", {{"kind", to_string(c.tomography.scan.kind)}, {"bins", c.tomography.scan.bins}}},
               {"grid", grid_summary_json(grid, reference)}};
}

ojson run_figure4(const ExperimentConfig& c, ArtifactWriter& artifacts) {
  Figure4Options opts;
  opts.amplitude = c.input.amplitude;
  opts.phase = c.input.phase_deg * kPi / 180.0;
  opts.scan = c.tomography.scan;
  opts.reconstruction = c.tomography.reconstruction;
  const Figure4Result res = simulate_figure4(c.chain_spec(), c.n_samples, Seed{c.seed}, opts);

  static constexpr std::array<const char*, 3> kStages = {"input", "teleported", "sequential"};
  ojson stages = ojson::array();
  const Eigen::Vector2d truth = res.states[0].mean();
  double max_shift = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    ojson s = grid_summary_json(res.grids[k], res.states[k]);
    s["stage"] = kStages[k];
    stages.push_back(std::move(s));
    max_shift = std::max(max_shift, (res.grids[k].peak_location() - truth).norm());
    if (c.output.grids) artifacts.grid(res.grids[k], std::string("wigner_") + kStages[k]);
  }
  const bool decreasing = res.grids[0].max_value() > res.grids[1].max_value() &&
                          res.grids[1].max_value() > res.grids[2].max_value();
  return ojson{{"stages", stages},
               {"peaks_strictly_decreasing", decreasing},
               {"max_peak_shift", max_shift}};
}

}  // namespace

// --- enums ------------------------------------------------------------------------

std::string to_string(Scenario s) {
  for (const auto& [name, value] : kScenarios) {
    if (value == s) return name;
  }
  return "unknown";
}

std::optional<Scenario> scenario_from_string(std::string_view name) {
  const auto it = kScenarios.find(name);
  if (it == kScenarios.end()) return std::nullopt;
  return it->second;
}

// --- config -----------------------------------------------------------------------

TeleporterConfig HopConfig::to_teleporter() const {
  TeleporterConfig cfg;
  if (r) {
    cfg.resource = {SqueezerSpec{*r, excess}, SqueezerSpec{*r, excess}};
  } else {
    cfg = TeleporterConfig::from_output_db(db_x.value_or(0.0), db_p.value_or(0.0), excess);
  }
  cfg.g_x = g_x;
  cfg.g_p = g_p;
  return cfg;
}

GaussianState InputConfig::state() const {
  const double phi = phase_deg * kPi / 180.0;
  return make_coherent(amplitude * std::cos(phi), amplitude * std::sin(phi));
}

ExperimentConfig ExperimentConfig::two_hop_default() {
  ExperimentConfig c;
  HopConfig first;
  first.db_x = 2.5;
  first.db_p = 2.8;
  HopConfig second;
  second.db_x = 2.3;
  second.db_p = 2.2;
  c.hops = {first, second};
  return c;
}

ChainSpec ExperimentConfig::chain_spec() const {
  ChainSpec spec{{}, to_string(scenario)};
  for (const auto& h : hops) spec.hops.push_back(h.to_teleporter());
  return spec;
}

std::vector<Diagnostic> ExperimentConfig::validate() const {
  std::vector<Diagnostic> d;
  const auto finite = [](double v) { return std::isfinite(v); };

  if (n_samples == 0) d.push_back({"n_samples", "must be >= 1"});
  if (!finite(input.amplitude) || input.amplitude < 0.0) {
    d.push_back({"input.amplitude", "must be finite and nonnegative"});
  }
  if (!finite(input.phase_deg)) d.push_back({"input.phase_deg", "must be finite"});

  if (needs_hops(*this) && hops.empty()) {
    d.push_back({"hops", "missing hop list (scenario '" + to_string(scenario) + "' needs at least one hop)"});
  }
  for (std::size_t h = 0; h < hops.size(); ++h) {
    const HopConfig& hop = hops[h];
    const std::string p = "hops[" + std::to_string(h) + "]";
    const bool has_db = hop.db_x || hop.db_p;
    if (hop.r && has_db) {
      d.push_back({p, "give either r or db_x/db_p, not both"});
    } else if (!hop.r && !has_db) {
      d.push_back({p, "needs r or db_x/db_p"});
    }
    if (hop.r && (std::isnan(*hop.r) || *hop.r < 0.0)) {
      d.push_back({p + ".r", "must be nonnegative (inf for an ideal source)"});
    }
    if (has_db) {
      for (const auto& [name, value] : {std::pair{"db_x", hop.db_x}, std::pair{"db_p", hop.db_p}}) {
        if (!value) {
          d.push_back({p + "." + name, "missing (db_x and db_p go together)"});
        } else if (!finite(*value) || *value < 0.0) {
          d.push_back({p + "." + name, "teleported output cannot sit below the vacuum level (0 dB)"});
        } else if (*value > kMaxHopDb) {
          d.push_back({p + "." + name, "above 4.771 dB, the unity-gain level without entanglement"});
        }
      }
    }
    if (!(hop.excess >= 1.0) || !finite(hop.excess)) {
      d.push_back({p + ".excess", "must be >= 1 (1 is a pure squeezer)"});
    }
    if (!finite(hop.g_x)) d.push_back({p + ".g_x", "must be finite"});
    if (!finite(hop.g_p)) d.push_back({p + ".g_p", "must be finite"});
    if (hop.r && std::isinf(*hop.r) && (hop.g_x != 1.0 || hop.g_p != 1.0)) {
      d.push_back({p, "an ideal source (r = inf) needs unity gains"});
    }
    if (hop.r && std::isinf(*hop.r) && mode == RunMode::Shots &&
        (scenario == Scenario::Teleport || scenario == Scenario::Chain)) {
      d.push_back({p + ".r", "an ideal source has no shot representation; use mode = \"analytic\""});
    }
  }

  if (scenario == Scenario::Swap) {
    if (!finite(swap.r) || swap.r < 0.0) d.push_back({"swap.r", "must be finite and nonnegative"});
    if (swap.gain && !finite(*swap.gain)) d.push_back({"swap.gain", "must be finite"});
  }
  if (scenario == Scenario::Thresholds) {
    if (thresholds.hops.empty()) d.push_back({"thresholds.hops", "needs at least one chain length"});
    for (const auto n : thresholds.hops) {
      if (n == 0) d.push_back({"thresholds.hops", "chain lengths must be >= 1"});
    }
    if (!(thresholds.target_fidelity > 0.0 && thresholds.target_fidelity < 1.0)) {
      d.push_back({"thresholds.target_fidelity", "must lie in (0, 1)"});
    }
  }
  if (scenario == Scenario::Figure4 && hops.size() != 2 && !hops.empty()) {
    d.push_back({"hops", "figure4 needs exactly two hops"});
  }
  if (scenario == Scenario::Tomography || scenario == Scenario::Figure4) {
    const auto& t = tomography;
    if (t.target != "input" && t.target != "teleported" && t.target != "chain") {
      d.push_back({"tomography.target", "expected \"input\", \"teleported\" or \"chain\""});
    }
    if (t.scan.kind == ScanKind::UniformGrid && t.scan.bins < 8) {
      d.push_back({"tomography.scan_bins", "need at least 8 phase steps"});
    }
    const auto& rec = t.reconstruction;
    if (!finite(rec.cutoff) || rec.cutoff <= 0.0) d.push_back({"tomography.cutoff", "must be positive"});
    if (rec.phase_bins < 8) d.push_back({"tomography.phase_bins", "must be >= 8"});
    if (rec.quadrature_bins < 2) d.push_back({"tomography.quadrature_bins", "must be >= 2"});
    if (!finite(rec.quadrature_span) || rec.quadrature_span <= 0.0) {
      d.push_back({"tomography.quadrature_span", "must be positive"});
    }
    if (!(rec.grid.x_max > rec.grid.x_min)) d.push_back({"tomography.grid_max", "must exceed grid_min"});
    if (rec.grid.nx < 2) d.push_back({"tomography.grid_points", "must be >= 2"});
  }
  if (output.report.empty()) d.push_back({"output.report", "must name a file"});
  return d;
}

ParsedConfig parse_config(std::string_view toml_text) {
  ParsedConfig parsed;
  ExperimentConfig& c = parsed.config;
  auto& errors = parsed.schema_errors;

  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream where;
    where << "line " << e.source().begin.line << ", column " << e.source().begin.column;
    errors.push_back({where.str(), std::string(e.description())});
    return parsed;
  }

  TableReader r(root, "", errors);
  if (auto v = r.string("scenario")) {
    if (auto s = scenario_from_string(*v)) {
      c.scenario = *s;
    } else {
      errors.push_back({"scenario", "unknown scenario '" + *v +
                                        "' (teleport, chain, swap, tomography, figure4, thresholds)"});
    }
  }
  if (auto v = r.integer("seed")) {
    if (*v < 0) {
      errors.push_back({"seed", "must be nonnegative"});
    } else {
      c.seed = static_cast<std::uint64_t>(*v);
    }
  }
  if (auto v = r.string("mode")) {
    if (*v == "analytic") {
      c.mode = RunMode::Analytic;
    } else if (*v == "shots") {
      c.mode = RunMode::Shots;
    } else {
      errors.push_back({"mode", "expected \"analytic\" or \"shots\""});
    }
  }
  if (auto v = r.count("n_samples")) c.n_samples = *v;

  if (const toml::table* t = r.table("input")) {
    TableReader in(*t, "input", errors);
    if (auto v = in.number("amplitude")) c.input.amplitude = *v;
    if (auto v = in.number("phase_deg")) c.input.phase_deg = *v;
    in.finish();
  }

  if (const toml::array* hops = r.array("hops")) {
    for (std::size_t h = 0; h < hops->size(); ++h) {
      const std::string p = "hops[" + std::to_string(h) + "]";
      if (const auto* t = hops->get(h)->as_table()) {
        c.hops.push_back(read_hop(*t, p, errors));
      } else {
        errors.push_back({p, "expected a table"});
      }
    }
  }

  if (const toml::table* t = r.table("swap")) {
    TableReader s(*t, "swap", errors);
    if (auto v = s.number("r")) c.swap.r = *v;
    c.swap.gain = s.number("gain");
    s.finish();
  }

  if (const toml::table* t = r.table("thresholds")) {
    TableReader s(*t, "thresholds", errors);
    if (const toml::array* a = s.array("hops")) {
      c.thresholds.hops.clear();
      for (std::size_t k = 0; k < a->size(); ++k) {
        const auto v = a->get(k)->value<std::int64_t>();
        if (!a->get(k)->is_integer() || !v || *v < 0) {
          errors.push_back({"thresholds.hops[" + std::to_string(k) + "]", "expected a nonnegative integer"});
        } else {
          c.thresholds.hops.push_back(static_cast<std::size_t>(*v));
        }
      }
    }
    if (auto v = s.number("target_fidelity")) c.thresholds.target_fidelity = *v;
    s.finish();
  }

  read_tomography(r, c.tomography, errors);

  if (const toml::table* t = r.table("output")) {
    TableReader o(*t, "output", errors);
    if (auto v = o.string("dir")) c.output.dir = *v;
    if (auto v = o.string("report")) c.output.report = *v;
    if (auto v = o.boolean("datasets")) c.output.datasets = *v;
    if (auto v = o.boolean("grids")) c.output.grids = *v;
    o.finish();
  }
  r.finish();
  return parsed;
}

ParsedConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<Diagnostic> diagnose(const ParsedConfig& parsed) {
  if (!parsed.schema_errors.empty()) return parsed.schema_errors;
  return parsed.config.validate();
}

namespace {
std::string join_diagnostics(const std::vector<Diagnostic>& d) {
  std::string out = "invalid configuration";
  for (const auto& x : d) out += "\n  " + x.to_string();
  return out;
}
}  // namespace

ConfigError::ConfigError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  const auto opt = [](const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); };
  ojson hops = ojson::array();
  for (const auto& h : c.hops) {
    hops.push_back({{"r", opt(h.r)},
                    {"excess", h.excess},
                    {"db_x", opt(h.db_x)},
                    {"db_p", opt(h.db_p)},
                    {"g_x", h.g_x},
                    {"g_p", h.g_p}});
  }
  const auto& rec = c.tomography.reconstruction;
  return ojson{
      {"scenario", to_string(c.scenario)},
      {"seed", c.seed},
      {"mode", c.mode == RunMode::Analytic ? "analytic" : "shots"},
      {"n_samples", c.n_samples},
      {"input", {{"amplitude", c.input.amplitude}, {"phase_deg", c.input.phase_deg}}},
      {"hops", hops},
      {"swap", {{"r", c.swap.r}, {"gain", opt(c.swap.gain)}}},
      {"thresholds", {{"hops", c.thresholds.hops}, {"target_fidelity", c.thresholds.target_fidelity}}},
      {"tomography",
       {{"target", c.tomography.target},
        {"scan", to_string(c.tomography.scan.kind)},
        {"scan_bins", c.tomography.scan.bins},
        {"cutoff", rec.cutoff},
        {"phase_bins", rec.phase_bins},
        {"quadrature_bins", rec.quadrature_bins},
        {"quadrature_span", rec.quadrature_span},
        {"grid_min", rec.grid.x_min},
        {"grid_max", rec.grid.x_max},
        {"grid_points", rec.grid.nx}}},
      // The output directory is left out so reports do not depend on where
      // they were written.
      {"output",
       {{"report", c.output.report}, {"datasets", c.output.datasets}, {"grids", c.output.grids}}},
  };
}

RunOutcome run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  if (auto d = config.validate(); !d.empty()) throw ConfigError(std::move(d));
  std::filesystem::create_directories(out_dir);

  ArtifactWriter artifacts(out_dir);
  ojson results;
  switch (config.scenario) {
    case Scenario::Teleport:
      results = run_teleport(config);
      break;
    case Scenario::Chain:
      results = run_chain_scenario(config);
      break;
    case Scenario::Swap:
      results = run_swap(config);
      break;
    case Scenario::Thresholds:
      results = run_thresholds(config);
      break;
    case Scenario::Tomography:
      results = run_tomography(config, artifacts);
      break;
    case Scenario::Figure4:
      results = run_figure4(config, artifacts);
      break;
  }

  RunOutcome outcome;
  outcome.files.push_back(config.output.report);
  for (const auto& f : artifacts.files()) outcome.files.push_back(f);
  outcome.report = ojson{{"schema_version", 1},
                         {"scenario", to_string(config.scenario)},
                         {"seed", config.seed},
                         {"config", config_to_json(config)},
                         {"results", std::move(results)},
                         {"artifacts", artifacts.files()}};
  write_file(out_dir / config.output.report, outcome.report.dump(2) + "\n");
  return outcome;
}

}  // namespace cvtele

#include "cvtele/experiment.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

namespace cvtele {
namespace {

namespace fs = std::filesystem;

constexpr const char* kTwoHop = R"(
scenario = "chain"
seed = 1

[[hops]]
db_x = 2.5
db_p = 2.8

[[hops]]
db_x = 2.3
db_p = 2.2
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class ExperimentDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cvtele_exp_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  fs::path dir_;
};

TEST(ParseConfig, WellFormedHasNoDiagnostics) {
  const ParsedConfig p = parse_config(kTwoHop);
  EXPECT_TRUE(diagnose(p).empty());
  ASSERT_EQ(p.config.hops.size(), 2u);
  EXPECT_EQ(p.config.hops[1].db_p, 2.2);
  EXPECT_EQ(p.config.scenario, Scenario::Chain);
  EXPECT_TRUE(ExperimentConfig::two_hop_default().validate().empty());
}

TEST(ParseConfig, ExcessBelowOneIsOneViolation) {
  const ParsedConfig p = parse_config(R"(
scenario = "chain"
[[hops]]
r = 0.35
excess = 0.5
)");
  const auto d = diagnose(p);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].field, "hops[0].excess");
}

TEST(ParseConfig, MissingHopListIsReported) {
  const auto d = diagnose(parse_config("scenario = \"chain\"\n"));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].field, "hops");
  EXPECT_NE(d[0].message.find("missing hop list"), std::string::npos);
  // Scenarios without teleporters do not need one.
  EXPECT_TRUE(diagnose(parse_config("scenario = \"thresholds\"\n")).empty());
}

TEST(ParseConfig, UnknownFieldsRejected) {
  const auto d = diagnose(parse_config(std::string(kTwoHop) + "\n[swap]\nr = 0.1\nsqueeze = 3\n"));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].field, "swap.squeeze");
  const auto top = diagnose(parse_config(std::string("colour = \"red\"\n") + kTwoHop));
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0].field, "colour");
}

TEST(ParseConfig, TypeAndSyntaxErrors) {
  EXPECT_EQ(diagnose(parse_config("seed = \"one\"\n"))[0].field, "seed");
  EXPECT_EQ(diagnose(parse_config("scenario = \"warp\"\n"))[0].field, "scenario");
  EXPECT_EQ(diagnose(parse_config("mode = \"fast\"\n"))[0].field, "mode");
  const auto syntax = diagnose(parse_config("seed = = 3\n"));
  ASSERT_EQ(syntax.size(), 1u);
  EXPECT_NE(syntax[0].field.find("line 1"), std::string::npos);
}

TEST(ValidateConfig, PhysicalityProblems) {
  ExperimentConfig c = ExperimentConfig::two_hop_default();
  c.hops[0].db_x = -0.5;
  auto d = c.validate();
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].field, "hops[0].db_x");

  c = ExperimentConfig::two_hop_default();
  c.hops[1].r = 0.3;
  d = c.validate();
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].field, "hops[1]");

  c = ExperimentConfig::two_hop_default();
  c.hops[0].db_p = 6.0;
  EXPECT_EQ(c.validate().at(0).field, "hops[0].db_p");

  c.scenario = Scenario::Thresholds;
  c.thresholds.target_fidelity = 1.0;
  bool found = false;
  for (const auto& x : c.validate()) found |= x.field == "thresholds.target_fidelity";
  EXPECT_TRUE(found);
}

TEST(ValidateConfig, IdealSourceFromToml) {
  const ParsedConfig p = parse_config("scenario = \"chain\"\n[[hops]]\nr = inf\n");
  EXPECT_TRUE(diagnose(p).empty());
  EXPECT_TRUE(p.config.chain_spec().hops[0].has_ideal_resource());
}

using RunExperiment = ExperimentDir;

TEST_F(RunExperiment, DefaultChainBeatsClassicalLimit) {
  const RunOutcome out = run_experiment(ExperimentConfig::two_hop_default(), dir_);
  const auto& f = out.report.at("results").at("fidelity");
  EXPECT_NEAR(f.at("chain_F").get<double>(), 0.57, 0.01);
  EXPECT_TRUE(f.at("beats_classical").get<bool>());
  EXPECT_NEAR(f.at("per_hop_F").at(0).get<double>(), 0.70, 0.01);
  EXPECT_NEAR(f.at("per_hop_F").at(1).get<double>(), 0.75, 0.01);
  const auto& budget = out.report.at("results").at("noise_budget");
  EXPECT_NEAR(budget.at("out_db_x").get<double>(), 3.9, 0.05);
  EXPECT_NEAR(budget.at("out_db_p").get<double>(), 4.1, 0.05);
  EXPECT_EQ(out.report.at("seed"), 1u);
  EXPECT_EQ(out.report.at("config").at("hops").size(), 2u);
  EXPECT_TRUE(fs::exists(dir_ / "report.json"));
}

TEST_F(RunExperiment, ThresholdsForTwoHops) {
  ExperimentConfig c = ExperimentConfig::two_hop_default();
  c.scenario = Scenario::Thresholds;
  const RunOutcome out = run_experiment(c, dir_);
  const auto& rows = out.report.at("results").at("thresholds");
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows.at(1).at("n"), 2);
  EXPECT_NEAR(rows.at(1).at("r_star").get<double>(), 0.3466, 1e-4);
  EXPECT_EQ(rows.at(0).at("r_star").get<double>(), 0.0);
}

TEST_F(RunExperiment, SwapScanBeatsSequential) {
  ExperimentConfig c = ExperimentConfig::two_hop_default();
  c.scenario = Scenario::Swap;
  const RunOutcome out = run_experiment(c, dir_);
  const auto& r = out.report.at("results");
  EXPECT_EQ(r.at("gain_source"), "scan");
  EXPECT_TRUE(r.at("fidelity").at("beats_classical").get<bool>());
  EXPECT_FALSE(r.at("sequential_two_hop").at("beats_classical").get<bool>());
}

TEST_F(RunExperiment, TeleportShotsReportsGain) {
  ExperimentConfig c = ExperimentConfig::two_hop_default();
  c.scenario = Scenario::Teleport;
  c.mode = RunMode::Shots;
  c.n_samples = 20000;
  const RunOutcome out = run_experiment(c, dir_);
  const auto& hops = out.report.at("results").at("hops");
  ASSERT_EQ(hops.size(), 2u);
  EXPECT_NEAR(hops.at(0).at("measured_gain").at("g_x").get<double>(), 1.0, 0.02);
  EXPECT_NEAR(hops.at(0).at("fidelity").get<double>(), 0.70, 0.01);
}

TEST_F(RunExperiment, TomographyWritesArtifacts) {
  ExperimentConfig c = ExperimentConfig::two_hop_default();
  c.scenario = Scenario::Tomography;
  c.tomography.target = "teleported";
  c.n_samples = 20000;
  c.output.datasets = true;
  const RunOutcome out = run_experiment(c, dir_);
  for (const auto& f : out.files) EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  EXPECT_TRUE(fs::exists(dir_ / "wigner.json"));
  EXPECT_TRUE(fs::exists(dir_ / "dataset.csv"));
  EXPECT_EQ(out.report.at("results").at("n_hops"), 1u);
}

TEST_F(RunExperiment, SameSeedSameReportBytes) {
  ExperimentConfig c = ExperimentConfig::two_hop_default();
  c.mode = RunMode::Shots;
  c.n_samples = 2000;
  run_experiment(c, dir_ / "a");
  run_experiment(c, dir_ / "b");
  EXPECT_EQ(slurp(dir_ / "a" / "report.json"), slurp(dir_ / "b" / "report.json"));
  c.seed = 2;
  run_experiment(c, dir_ / "c");
  EXPECT_NE(slurp(dir_ / "a" / "report.json"), slurp(dir_ / "c" / "report.json"));
}

TEST_F(RunExperiment, InvalidConfigThrows) {
  ExperimentConfig c = ExperimentConfig::two_hop_default();
  c.hops[0].excess = 0.5;
  try {
    run_experiment(c, dir_);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    ASSERT_EQ(e.diagnostics().size(), 1u);
    EXPECT_EQ(e.diagnostics()[0].field, "hops[0].excess");
  }
}

// End-to-end checks of the command-line tool. The binary path comes from the
// test environment.
class Cli : public ExperimentDir {
 protected:
  void SetUp() override {
    ExperimentDir::SetUp();
    const char* bin = std::getenv("CVTELELAB_BIN");
    if (!bin) GTEST_SKIP() << "CVTELELAB_BIN not set";
    bin_ = bin;
  }

  int run(const std::string& args, const std::string& env = "") const {
    const std::string cmd = env + " \"" + bin_ + "\" " + args + " >\"" + (dir_ / "stdout.txt").string() +
                            "\" 2>\"" + (dir_ / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string bin_;
};

TEST_F(Cli, ValidateGoodAndBad) {
  const fs::path good = write("good.toml", kTwoHop);
  EXPECT_EQ(run("validate --config \"" + good.string() + "\""), 0);
  const fs::path bad = write("bad.toml", "scenario = \"chain\"\n[[hops]]\nr = 0.3\nexcess = 0.5\n");
  EXPECT_NE(run("validate --config \"" + bad.string() + "\""), 0);
  EXPECT_NE(slurp(dir_ / "stderr.txt").find("hops[0].excess"), std::string::npos);
  EXPECT_NE(run("validate --config \"" + (dir_ / "nope.toml").string() + "\""), 0);
}

TEST_F(Cli, RunWritesReportWithOverrides) {
  const fs::path cfg = write("c.toml", kTwoHop);
  const fs::path out = dir_ / "out";
  EXPECT_EQ(run("run --config \"" + cfg.string() + "\" --seed 42 --scenario thresholds --quiet --out \"" +
                out.string() + "\""),
            0);
  EXPECT_TRUE(slurp(dir_ / "stdout.txt").empty());
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  EXPECT_EQ(report.at("seed"), 42);
  EXPECT_EQ(report.at("scenario"), "thresholds");
}

TEST_F(Cli, EnvironmentSetsDefaultOutputDir) {
  const fs::path out = dir_ / "from_env";
  EXPECT_EQ(run("run --scenario thresholds", "CV_TELELAB_OUT=\"" + out.string() + "\""), 0);
  EXPECT_TRUE(fs::exists(out / "report.json"));
}

TEST_F(Cli, DefaultRunReproducesTwoHopExperiment) {
  const fs::path out = dir_ / "default";
  EXPECT_EQ(run("run --out \"" + out.string() + "\""), 0);
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  EXPECT_NEAR(report.at("results").at("fidelity").at("chain_F").get<double>(), 0.57, 0.01);
  EXPECT_TRUE(report.at("results").at("fidelity").at("beats_classical").get<bool>());
}

TEST_F(Cli, UnknownScenarioAndMissingSubcommandFail) {
  EXPECT_NE(run("run --scenario warp --out \"" + (dir_ / "x").string() + "\""), 0);
  EXPECT_NE(run(""), 0);
}

}  // namespace
}  // namespace cvtele

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "fbmarb/errors.hpp"
#include "fbmarb/experiment.hpp"

using namespace fbmarb;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.grid_levels = {6, 7, 8, 9, 10, 11, 12};
  c.num_seeds = 40;
  c.master_seed = 11;
  return c;
}

const Verdict* find_verdict(const RunReport& r, std::string_view name) {
  for (const auto& v : r.verdicts) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST(Experiment, SmallHestonRunPasses) {
  const RunReport r = run_experiment(small_config(), {2});
  EXPECT_EQ(r.command, "simulate");
  EXPECT_EQ(r.terminal.size(), 40u * 7u);
  EXPECT_EQ(r.levels.size(), 7u);
  EXPECT_TRUE(r.failures.empty());
  for (const auto& v : r.verdicts) EXPECT_TRUE(v.passed) << v.name << ": " << v.detail;
  EXPECT_EQ(r.exit_code(), kExitPass);
  for (std::size_t i = 1; i < r.terminal.size(); ++i) {
    const auto& a = r.terminal[i - 1];
    const auto& b = r.terminal[i];
    EXPECT_TRUE(a.seed < b.seed || (a.seed == b.seed && a.level < b.level));
  }
}

TEST(Experiment, OutputIndependentOfThreadCount) {
  const ExperimentConfig c = small_config();
  const RunReport one = run_experiment(c, {1});
  const RunReport four = run_experiment(c, {4});
  EXPECT_EQ(terminal_csv(one), terminal_csv(four));
  EXPECT_EQ(residuals_csv(one), residuals_csv(four));
}

TEST(Experiment, MasterSeedChangesPaths) {
  ExperimentConfig c = small_config();
  const std::string a = terminal_csv(run_experiment(c, {2}));
  c.master_seed = 12;
  EXPECT_NE(a, terminal_csv(run_experiment(c, {2})));
}

TEST(Experiment, FlatMarketIsNullEverywhere) {
  ExperimentConfig c = small_config();
  c.volatility = ConstantVol{0.0};
  c.market.nu = c.market.r;
  const RunReport r = run_experiment(c, {2});
  for (const auto& t : r.terminal) {
    EXPECT_EQ(t.terminal_wealth, 0.0);
    EXPECT_EQ(t.status, CertificateStatus::kNullArbitrage);
  }
  for (const auto& l : r.levels) EXPECT_LE(l.max_maxabs, 1e-12);
  EXPECT_EQ(r.exit_code(), kExitPass);
}

TEST(Experiment, PowerClockRun) {
  ExperimentConfig c = small_config();
  c.modulator.kind = ModulatorSpec::Kind::kTimeChanged;
  c.modulator.time_change.kind = TimeChangeSpec::Kind::kPower;
  c.modulator.time_change.p = 2.0;
  c.grid_levels = {5, 6, 7, 8};
  const RunReport r = run_experiment(c, {2});
  EXPECT_TRUE(r.failures.empty());
  EXPECT_TRUE(find_verdict(r, "arbitrage_certificates")->passed);
}

TEST(Experiment, IntegratedCirClockRun) {
  ExperimentConfig c = small_config();
  c.modulator.kind = ModulatorSpec::Kind::kTimeChanged;
  c.modulator.time_change.kind = TimeChangeSpec::Kind::kIntegratedCir;
  c.grid_levels = {5, 6, 7};
  c.num_seeds = 10;
  const RunReport r = run_experiment(c, {2});
  EXPECT_TRUE(r.failures.empty());
  EXPECT_TRUE(find_verdict(r, "arbitrage_certificates")->passed);
}

TEST(Experiment, SimulateRequiresLongMemory) {
  ExperimentConfig c = small_config();
  c.modulator.hurst = 0.4;
  EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(Experiment, ExitCodePrecedence) {
  RunReport r;
  EXPECT_EQ(r.exit_code(), kExitPass);
  r.verdicts.push_back({"stat", false, false, ""});
  EXPECT_EQ(r.exit_code(), kExitStatisticalFailure);
  r.verdicts.push_back({"exact", false, true, ""});
  EXPECT_EQ(r.exit_code(), kExitConsistencyFailure);
  RunReport s;
  s.failures.push_back({0, 8, "internal_consistency", "x"});
  EXPECT_EQ(s.exit_code(), kExitConsistencyFailure);
}

TEST(CalculusSuite, SmallRunPasses) {
  ExperimentConfig c = small_config();
  c.grid_levels = {8, 9, 10, 11, 12};
  c.num_seeds = 30;
  const RunReport r = run_calculus_suite(c, {2});
  EXPECT_EQ(r.command, "calculus");
  for (const auto& v : r.verdicts) EXPECT_TRUE(v.passed) << v.name << ": " << v.detail;
  EXPECT_EQ(r.calculus.size(), 13u * 5u);
  EXPECT_TRUE(std::isnan(r.calculus.front().slope_so_far));
  EXPECT_NEAR(r.slopes.at("qv"), 1.0 - 2.0 * 0.7, 0.1);
}

TEST(CalculusSuite, RoughModulatorSkipsMonotonicityVerdicts) {
  ExperimentConfig c = small_config();
  c.modulator.hurst = 0.3;
  c.grid_levels = {6, 7, 8};
  c.num_seeds = 10;
  const RunReport r = run_calculus_suite(c, {2});
  EXPECT_EQ(find_verdict(r, "qv_decreasing"), nullptr);
  EXPECT_NE(find_verdict(r, "qv_slope"), nullptr);
  EXPECT_TRUE(find_verdict(r, "abel_identity_exact")->passed);
}

TEST(Report, CsvHeadersAndFiles) {
  ExperimentConfig c = small_config();
  c.num_seeds = 3;
  const RunReport r = run_experiment(c, {1});
  EXPECT_EQ(first_line(terminal_csv(r)), "seed,level,P_T,exponent,cert_pass");
  EXPECT_EQ(first_line(residuals_csv(r)),
            "level,mean_maxabs,median_maxabs,max_maxabs,qv_of_integral");
  EXPECT_EQ(first_line(calculus_csv(r)), "verifier,level,mean_residual,slope_so_far");

  const nlohmann::json s = summary_json(r);
  EXPECT_EQ(s.at("command"), "simulate");
  EXPECT_EQ(s.at("version"), kVersion);
  EXPECT_EQ(s.at("exit_code"), r.exit_code());
  EXPECT_EQ(s.at("all_pass").get<bool>(), r.exit_code() == kExitPass);

  const auto dir = std::filesystem::temp_directory_path() / "fbmarb_report_test";
  std::filesystem::remove_all(dir);
  write_report(r, dir);
  for (const char* f : {"terminal.csv", "residuals.csv", "calculus.csv", "summary.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  std::ifstream in(dir / "terminal.csv");
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(buf.str(), terminal_csv(r));
  std::filesystem::remove_all(dir);
}

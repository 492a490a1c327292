#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fbmarb/config.hpp"
#include "fbmarb/strategy.hpp"

namespace fbmarb {

inline constexpr const char* kVersion = FBMARB_VERSION;

enum ExitCode : int {
  kExitPass = 0,
  kExitStatisticalFailure = 2,
  kExitConsistencyFailure = 3,
  kExitConfigError = 4,
};

struct TerminalRecord {
  std::uint64_t seed = 0;  // ensemble index in [0, num_seeds)
  int level = 0;
  double terminal_wealth = 0.0;
  double exponent = 0.0;
  bool cert_pass = false;
  CertificateStatus status = CertificateStatus::kFailed;
};

/// Per-level statistics of the self-financing residual (max-abs per path,
/// then mean/median/max over the ensemble) and mean QV of the running
/// integral read at that level.
struct LevelStats {
  int level = 0;
  double mean_maxabs = 0.0;
  double median_maxabs = 0.0;
  double max_maxabs = 0.0;
  double qv_of_integral = 0.0;
};

struct CalculusRow {
  std::string verifier;
  int level = 0;
  double mean_residual = 0.0;
  double slope_so_far = 0.0;  // NaN until two positive means are available
};

struct Verdict {
  std::string name;
  bool passed = false;
  bool consistency = false;  // true: exact check; false: statistical
  std::string detail;
};

struct RunFailure {
  std::uint64_t seed = 0;
  int level = 0;
  std::string kind;  // internal_consistency | numeric_overflow | integrability_rejected | ...
  std::string message;
};

struct RunReport {
  std::string command;  // simulate | calculus
  ExperimentConfig config;
  std::vector<TerminalRecord> terminal;  // sorted by (seed, level)
  std::vector<LevelStats> levels;
  std::vector<CalculusRow> calculus;
  std::map<std::string, double> slopes;
  std::vector<Verdict> verdicts;
  std::vector<RunFailure> failures;
  FactorizationReport factorization;
  std::string version = kVersion;
  double wall_seconds = 0.0;

  int exit_code() const;
};

struct RunOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
};

/// For every seed index: modulator, volatility and prices at the finest
/// level; each coarser level reads the same paths on a subsampled grid.
/// Per level: holdings, value, residuals and certificate.  Requires
/// hurst in (1/2, 1).
RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Convergence tables for the calculus verifiers (modified Ito formula,
/// integration by parts, QV of the integral, function-of-modulator
/// integrals, QV of Z).
RunReport run_calculus_suite(const ExperimentConfig& config, const RunOptions& options = {});

/// terminal.csv, residuals.csv, calculus.csv and summary.json in `dir`.
void write_report(const RunReport& report, const std::filesystem::path& dir);

std::string terminal_csv(const RunReport& report);
std::string residuals_csv(const RunReport& report);
std::string calculus_csv(const RunReport& report);
nlohmann::json summary_json(const RunReport& report);

}  // namespace fbmarb

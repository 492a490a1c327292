#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fbmarb/fbm.hpp"
#include "fbmarb/market.hpp"
#include "fbmarb/strategy.hpp"
#include "fbmarb/volatility.hpp"

namespace fbmarb {

struct TimeChangeSpec {
  enum class Kind { kIdentity, kPower, kIntegratedCir };
  Kind kind = Kind::kIdentity;
  double p = 1.0;
  CirClockParams cir;

  bool deterministic() const noexcept { return kind != Kind::kIntegratedCir; }
};

struct ModulatorSpec {
  enum class Kind { kFbm, kTimeChanged };
  Kind kind = Kind::kFbm;
  double hurst = 0.7;
  TimeChangeSpec time_change;
};

/// Pass/fail thresholds of the statistical verdicts.
struct Thresholds {
  double qv_slope_tolerance = 0.1;
  std::size_t max_monotonicity_violations = 1;
  double integral_qv_ratio = 0.25;
  double exact_tolerance = 1e-12;
  double integrability_bound = 1e6;
};

struct ExperimentConfig {
  MarketParams market;
  StrategyParams strategy;
  ModulatorSpec modulator;
  VolatilityModelSpec volatility = HestonVol{};
  std::vector<int> grid_levels{8, 9, 10, 11, 12, 13, 14};
  std::size_t num_seeds = 1000;
  std::uint64_t master_seed = 0;
  std::string output_dir = "fbmarb_out";
  Thresholds thresholds;

  int finest_level() const { return grid_levels.back(); }
};

/// Largest dyadic level allowed for a time-changed modulator, whose sampler
/// holds a dense (2^level)^2 Cholesky factor.
inline constexpr int kMaxTimeChangedLevel = 13;
inline constexpr int kMaxLevel = 20;

/// Parses and validates.  Throws ConfigError listing every problem found
/// (syntax errors carry line and column; field errors carry the JSON path).
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace fbmarb

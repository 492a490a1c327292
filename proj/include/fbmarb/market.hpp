#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fbmarb/calculus.hpp"
#include "fbmarb/sample_path.hpp"
#include "fbmarb/volatility.hpp"

namespace fbmarb {

struct MarketParams {
  double nu = 0.1;     // drift per unit time
  double r = 0.05;     // riskless rate per unit time
  double y0 = 100.0;   // initial risky price
  double horizon = 1.0;

  std::vector<std::string> problems() const;
};

/// Riskless X, risky Y and the shared running integral I = int sigma dZ,
/// all on one grid.  Y_t = y0 exp(nu t + I_t).
struct MarketPaths {
  MarketParams params;
  SamplePath riskless;
  SamplePath risky;
  SamplePath log_integral;
  SamplePath modulator;
  VolPath vol;
  /// Hurst parameter the modulator was generated with.  Descriptive only:
  /// nothing downstream of price construction reads it.
  double hurst_label = std::numeric_limits<double>::quiet_NaN();
};

/// X_t = exp(r t).
SamplePath riskless_path(const MarketParams& params, const Partition& grid);

/// Builds I with the left-point sum, then Y.  Throws GridMismatchError when
/// vol and z differ in grid and NumericOverflowError (with the offending
/// time) when the exponent or price is not finite and positive.
MarketPaths price_path(const MarketParams& params, const VolPath& vol,
                       const SamplePath& z,
                       double hurst_label = std::numeric_limits<double>::quiet_NaN());

/// Max relative gap between the exponential price and the Euler recursion
/// Y_{i+1} = Y_i (1 + nu dt + sigma_i dZ) at each dyadic level (levels are
/// exponents, each at most log2 of the path's step count; the path must sit
/// on a uniform dyadic grid).  An Euler price reaching <= 0 marks the level
/// failed with an infinite residual.  Empty `levels` means every level.
struct SdeConsistencyReport {
  ConvergenceReport convergence;
  std::vector<std::size_t> failed_grid_sizes;
};

SdeConsistencyReport discretized_sde_consistency(const MarketPaths& paths,
                                                 std::span<const int> levels = {});

}  // namespace fbmarb

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fbmarb/market.hpp"
#include "fbmarb/sample_path.hpp"

namespace fbmarb {

struct StrategyParams {
  double c = 1.0;  // scale, > 0

  std::vector<std::string> problems() const;
};

/// Everything the trading rule is allowed to see besides (t, Y_t).  There is
/// deliberately no slot for the Hurst parameter, the volatility or the drift.
struct HoldingRule {
  double c = 1.0;
  double y0 = 100.0;
  double r = 0.0;

  static HoldingRule from(const StrategyParams& strategy, const MarketParams& market) {
    return {strategy.c, market.y0, market.r};
  }
};

struct Holdings {
  double riskless = 0.0;  // units of X
  double risky = 0.0;     // units of Y
};

/// With D = exp(-r t) Y_t:
///   riskless = (c / y0) (y0^2 - D^2),  risky = (2 c / y0) (D - y0).
/// Throws ParameterDomainError for y_t <= 0 or t < 0.
Holdings holdings(double t, double y_t, const HoldingRule& rule);

/// The same portfolio written through x = (nu - r) t + I_t:
///   riskless = c y0 (1 - e^{2x}),  risky = 2 c (e^x - 1).
/// Throws NumericOverflowError when e^{2x} overflows.
Holdings exponent_form_holdings(double t, double running_integral,
                                const StrategyParams& strategy,
                                const MarketParams& market);

/// Relative agreement of two holdings at tolerance `tol`, measured against
/// the size of the terms being differenced (c y0 for riskless, 2c for risky)
/// so that values near zero are not judged by their own magnitude.
bool holdings_agree(const Holdings& a, const Holdings& b, const HoldingRule& rule,
                    double tol = 1e-12);

struct PortfolioTrajectory {
  Partition grid{std::vector<double>{0.0, 1.0}};
  std::vector<double> theta0;
  std::vector<double> theta1;
  std::vector<double> value;              // theta0 X + theta1 Y
  std::vector<double> closed_form_value;  // c y0 e^{rt} (e^x - 1)^2
  std::vector<double> exponent;           // x = (nu - r) t + I_t
  std::vector<double> sf_residuals;       // one per step
};

/// Builds holdings from prices, both value columns and the self-financing
/// residuals.  Throws InternalConsistencyError if value and closed form
/// disagree beyond 1e-10 relative to the magnitude of the two holdings'
/// values at any grid point.
PortfolioTrajectory portfolio_value(const MarketPaths& paths,
                                    const StrategyParams& strategy);

/// residual_i = (P_{i+1} - P_i) - [theta0_i (X_{i+1} - X_i) + theta1_i (Y_{i+1} - Y_i)].
std::vector<double> self_financing_residuals(const PortfolioTrajectory& traj,
                                             const MarketPaths& paths);

struct ResidualSummary {
  double max_abs = 0.0;
  double sum_abs = 0.0;
};

ResidualSummary summarize(const std::vector<double>& residuals);

enum class CertificateStatus {
  kArbitrage,         // P_0 = 0, P >= 0, P_T > 0
  kNullArbitrage,     // P identically zero: no gain, no loss
  kZeroTerminal,      // exponent vanished exactly at T; P_T = 0 (null event)
  kFailed,
};

std::string to_string(CertificateStatus status);

struct ArbitrageCertificate {
  CertificateStatus status = CertificateStatus::kFailed;
  double terminal_wealth = 0.0;
  double terminal_exponent = 0.0;
  double positive_interior_fraction = 0.0;
  std::optional<double> failure_time;
  std::string message;

  bool passed() const noexcept { return status != CertificateStatus::kFailed; }
};

ArbitrageCertificate arbitrage_certificate(const PortfolioTrajectory& traj);

}  // namespace fbmarb

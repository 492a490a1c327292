#include "fbmarb/strategy.hpp"

#include <cmath>

#include <fmt/format.h>

#include "fbmarb/errors.hpp"

namespace fbmarb {

std::vector<std::string> StrategyParams::problems() const {
  std::vector<std::string> p;
  if (!(c > 0.0) || !std::isfinite(c)) {
    p.push_back(fmt::format("strategy.c must be > 0, got {}", c));
  }
  return p;
}

Holdings holdings(double t, double y_t, const HoldingRule& rule) {
  if (!(y_t > 0.0)) {
    throw ParameterDomainError(fmt::format("price must be positive, got {} at t={}", y_t, t));
  }
  if (!(t >= 0.0)) throw ParameterDomainError("time must be nonnegative");
  const double d = std::exp(-rule.r * t) * y_t;
  const double y0 = rule.y0;
  // c is applied last so holdings scale exactly with c.
  return {rule.c * ((y0 - d) * (y0 + d) / y0), (2.0 * rule.c) * ((d - y0) / y0)};
}

Holdings exponent_form_holdings(double t, double running_integral,
                                const StrategyParams& strategy,
                                const MarketParams& market) {
  const double x = (market.nu - market.r) * t + running_integral;
  const double grow2 = std::expm1(2.0 * x);
  if (!std::isfinite(grow2)) {
    throw NumericOverflowError(fmt::format("exp(2x) overflows for x={} at t={}", x, t), t);
  }
  return {strategy.c * (-market.y0 * grow2), (2.0 * strategy.c) * std::expm1(x)};
}

bool holdings_agree(const Holdings& a, const Holdings& b, const HoldingRule& rule,
                    double tol) {
  const double s0 = std::abs(rule.c * rule.y0);
  const double s1 = std::abs(2.0 * rule.c);
  return std::abs(a.riskless - b.riskless) <= tol * (std::abs(a.riskless) + s0) &&
         std::abs(a.risky - b.risky) <= tol * (std::abs(a.risky) + s1);
}

PortfolioTrajectory portfolio_value(const MarketPaths& paths,
                                    const StrategyParams& strategy) {
  if (auto p = strategy.problems(); !p.empty()) throw ConfigError(std::move(p));
  const MarketParams& m = paths.params;
  const HoldingRule rule = HoldingRule::from(strategy, m);
  const auto t = paths.risky.times();
  const auto x = paths.riskless.values();
  const auto y = paths.risky.values();
  const auto integral = paths.log_integral.values();
  const std::size_t n = t.size();

  PortfolioTrajectory traj{partition_of(paths.risky), std::vector<double>(n),
                           std::vector<double>(n), std::vector<double>(n),
                           std::vector<double>(n), std::vector<double>(n), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const Holdings h = holdings(t[i], y[i], rule);
    traj.theta0[i] = h.riskless;
    traj.theta1[i] = h.risky;
    const double a = h.riskless * x[i];
    const double b = h.risky * y[i];
    traj.value[i] = a + b;

    const double ex = (m.nu - m.r) * t[i] + integral[i];
    const double g = std::expm1(ex);
    traj.exponent[i] = ex;
    traj.closed_form_value[i] = strategy.c * (m.y0 * std::exp(m.r * t[i]) * (g * g));

    const double gap = std::abs(traj.value[i] - traj.closed_form_value[i]);
    if (!(gap <= 1e-10 * (std::abs(a) + std::abs(b)))) {
      throw InternalConsistencyError(fmt::format(
          "portfolio value {} disagrees with closed form {} at t={}", traj.value[i],
          traj.closed_form_value[i], t[i]));
    }
  }
  traj.sf_residuals = self_financing_residuals(traj, paths);
  return traj;
}

std::vector<double> self_financing_residuals(const PortfolioTrajectory& traj,
                                             const MarketPaths& paths) {
  const auto x = paths.riskless.values();
  const auto y = paths.risky.values();
  if (traj.value.size() != y.size()) {
    throw GridMismatchError("self_financing_residuals: trajectory and paths differ");
  }
  std::vector<double> res(y.empty() ? 0 : y.size() - 1);
  for (std::size_t i = 0; i < res.size(); ++i) {
    const double gains =
        traj.theta0[i] * (x[i + 1] - x[i]) + traj.theta1[i] * (y[i + 1] - y[i]);
    res[i] = (traj.value[i + 1] - traj.value[i]) - gains;
  }
  return res;
}

ResidualSummary summarize(const std::vector<double>& residuals) {
  ResidualSummary s;
  for (const double r : residuals) {
    s.max_abs = std::max(s.max_abs, std::abs(r));
    s.sum_abs += std::abs(r);
  }
  return s;
}

std::string to_string(CertificateStatus status) {
  switch (status) {
    case CertificateStatus::kArbitrage: return "arbitrage";
    case CertificateStatus::kNullArbitrage: return "null_arbitrage";
    case CertificateStatus::kZeroTerminal: return "zero_terminal";
    case CertificateStatus::kFailed: return "failed";
  }
  return "unknown";
}

ArbitrageCertificate arbitrage_certificate(const PortfolioTrajectory& traj) {
  ArbitrageCertificate cert;
  const auto t = traj.grid.times();
  const auto& p = traj.closed_form_value;
  const std::size_t n = p.size();
  cert.terminal_wealth = p.back();
  cert.terminal_exponent = traj.exponent.back();

  const auto fail = [&](std::size_t i, std::string why) {
    cert.status = CertificateStatus::kFailed;
    cert.failure_time = t[i];
    cert.message = std::move(why);
    return cert;
  };

  if (p[0] != 0.0 || traj.value[0] != 0.0 || traj.theta0[0] != 0.0 ||
      traj.theta1[0] != 0.0) {
    return fail(0, "initial capital is not zero");
  }
  std::size_t positive = 0;
  bool all_zero = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p[i] >= 0.0)) return fail(i, fmt::format("negative portfolio value {}", p[i]));
    if (p[i] != 0.0) all_zero = false;
    if (i > 0 && i + 1 < n && p[i] > 0.0) ++positive;
  }
  cert.positive_interior_fraction =
      n > 2 ? static_cast<double>(positive) / static_cast<double>(n - 2) : 0.0;

  if (all_zero) {
    cert.status = CertificateStatus::kNullArbitrage;
    cert.message = "portfolio identically zero: no gain, no loss";
  } else if (cert.terminal_exponent == 0.0) {
    cert.status = CertificateStatus::kZeroTerminal;
    cert.message = "terminal exponent vanished exactly; P_T = 0 on a null event";
  } else if (cert.terminal_wealth > 0.0) {
    cert.status = CertificateStatus::kArbitrage;
  } else {
    return fail(n - 1, fmt::format("terminal wealth {} with exponent {}",
                                   cert.terminal_wealth, cert.terminal_exponent));
  }
  return cert;
}

}  // namespace fbmarb

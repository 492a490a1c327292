#include "fbmarb/market.hpp"

#include <bit>
#include <cmath>

#include <fmt/format.h>

#include "fbmarb/errors.hpp"

namespace fbmarb {

std::vector<std::string> MarketParams::problems() const {
  std::vector<std::string> p;
  if (!std::isfinite(nu)) p.push_back(fmt::format("market.nu must be finite, got {}", nu));
  if (!std::isfinite(r)) p.push_back(fmt::format("market.r must be finite, got {}", r));
  if (!(y0 > 0.0) || !std::isfinite(y0)) {
    p.push_back(fmt::format("market.y0 must be > 0, got {}", y0));
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    p.push_back(fmt::format("market.horizon must be > 0, got {}", horizon));
  }
  return p;
}

SamplePath riskless_path(const MarketParams& params, const Partition& grid) {
  std::vector<double> x(grid.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::exp(params.r * grid.times()[i]);
  return grid.constant(0.0).with_values(std::move(x));
}

MarketPaths price_path(const MarketParams& params, const VolPath& vol,
                       const SamplePath& z, double hurst_label) {
  require_same_grid(vol.path, z, "price_path");
  SamplePath integral = stieltjes_integral(vol.path, z);
  const auto t = z.times();
  const auto iv = integral.values();
  std::vector<double> y(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double exponent = params.nu * t[i] + iv[i];
    y[i] = params.y0 * std::exp(exponent);
    if (!std::isfinite(exponent) || !std::isfinite(y[i]) || !(y[i] > 0.0)) {
      throw NumericOverflowError(
          fmt::format("risky price exponent {} out of range at t={}", exponent, t[i]), t[i]);
    }
  }
  const Partition grid = partition_of(z);
  return MarketPaths{params,
                     riskless_path(params, grid),
                     z.with_values(std::move(y)),
                     std::move(integral),
                     z,
                     vol,
                     hurst_label};
}

SdeConsistencyReport discretized_sde_consistency(const MarketPaths& paths,
                                                 std::span<const int> levels) {
  const std::size_t n = paths.modulator.size() - 1;
  if (!std::has_single_bit(n)) {
    throw InvariantViolation("discretized_sde_consistency needs 2^k intervals");
  }
  const int finest = std::countr_zero(n);
  std::vector<int> chosen(levels.begin(), levels.end());
  if (chosen.empty()) {
    for (int k = 0; k <= finest; ++k) chosen.push_back(k);
  }

  SdeConsistencyReport out;
  const MarketParams& p = paths.params;
  for (std::size_t li = 0; li < chosen.size(); ++li) {
    const int k = chosen[li];
    if (k < 0 || k > finest || (li > 0 && k <= chosen[li - 1])) {
      throw InvariantViolation(fmt::format("invalid dyadic level {}", k));
    }
    const std::size_t stride = n >> k;
    const SamplePath z = paths.modulator.subsample(stride);
    const SamplePath sigma = paths.vol.path.subsample(stride);
    const SamplePath integral = stieltjes_integral(sigma, z);
    const auto t = z.times();
    const auto zv = z.values();
    const auto sv = sigma.values();
    const auto iv = integral.values();

    double euler = p.y0;
    double gap = 0.0;
    bool failed = false;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      euler *= 1.0 + p.nu * (t[i + 1] - t[i]) + sv[i] * (zv[i + 1] - zv[i]);
      if (!(euler > 0.0)) {
        failed = true;
        break;
      }
      const double exact = p.y0 * std::exp(p.nu * t[i + 1] + iv[i + 1]);
      gap = std::max(gap, std::abs(euler - exact) / exact);
    }
    const std::size_t size = std::size_t{1} << k;
    out.convergence.grid_sizes.push_back(size);
    out.convergence.residuals.push_back(failed ? std::numeric_limits<double>::infinity()
                                               : gap);
    if (failed) out.failed_grid_sizes.push_back(size);
  }
  out.convergence.slope =
      loglog_slope(std::span<const std::size_t>(out.convergence.grid_sizes),
                   std::span<const double>(out.convergence.residuals));
  return out;
}

}  // namespace fbmarb

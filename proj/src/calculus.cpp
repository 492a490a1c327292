#include "fbmarb/calculus.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fbmarb/errors.hpp"

namespace fbmarb {

namespace {

double checked(double v, const char* what, double t) {
  if (!std::isfinite(v)) {
    throw NumericDomainError(std::string(what) + " is not finite at t=" +
                             std::to_string(t));
  }
  return v;
}

}  // namespace

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

double loglog_slope(std::span<const std::size_t> x, std::span<const double> y) {
  std::vector<double> xd(x.begin(), x.end());
  return loglog_slope(std::span<const double>(xd), y);
}

std::size_t count_decreasing_steps(std::span<const double> y) {
  std::size_t count = 0;
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (y[i] < y[i - 1]) ++count;
  }
  return count;
}

SamplePath stieltjes_integral(const SamplePath& integrand,
                              const SamplePath& integrator) {
  require_same_grid(integrand, integrator, "stieltjes_integral");
  const auto y = integrand.values();
  const auto x = integrator.values();
  std::vector<double> out(y.size());
  out[0] = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    acc += y[i] * (x[i + 1] - x[i]);
    out[i + 1] = acc;
  }
  return integrator.with_values(std::move(out));
}

double quadratic_variation(const SamplePath& path) {
  if (path.size() < 2) throw InvariantViolation("quadratic_variation needs 2+ points");
  const auto z = path.values();
  double qv = 0.0;
  for (std::size_t i = 0; i + 1 < z.size(); ++i) {
    const double dz = z[i + 1] - z[i];
    qv += dz * dz;
  }
  return qv;
}

double cross_variation(const SamplePath& w, const SamplePath& z) {
  require_same_grid(w, z, "cross_variation");
  const auto a = w.values();
  const auto b = z.values();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    acc += (a[i + 1] - a[i]) * (b[i + 1] - b[i]);
  }
  return acc;
}

double ito_formula_residual(const SmoothField& field, const SamplePath& z) {
  const auto t = z.times();
  const auto v = z.values();
  const std::size_t last = v.size() - 1;
  double drift = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < last; ++i) {
    drift += checked(field.d_time(t[i], v[i]), "dF/dt", t[i]) * (t[i + 1] - t[i]);
    noise += checked(field.d_space(t[i], v[i]), "dF/dz", t[i]) * (v[i + 1] - v[i]);
  }
  const double end = checked(field.value(t[last], v[last]), "F", t[last]);
  const double start = checked(field.value(t[0], v[0]), "F", t[0]);
  return std::abs(end - start - drift - noise);
}

double integration_by_parts_residual(const SamplePath& w, const SamplePath& z) {
  require_same_grid(w, z, "integration_by_parts_residual");
  const double wz = stieltjes_integral(w, z).back();
  const double zw = stieltjes_integral(z, w).back();
  return std::abs(wz + zw - (z.back() * w.back() - z.front() * w.front()));
}

double abel_identity_residual(const SamplePath& w, const SamplePath& z) {
  require_same_grid(w, z, "abel_identity_residual");
  const double wz = stieltjes_integral(w, z).back();
  const double zw = stieltjes_integral(z, w).back();
  return std::abs(wz + zw + cross_variation(w, z) -
                  (z.back() * w.back() - z.front() * w.front()));
}

ConvergenceReport integral_qv_residual(const SamplePath& sigma, const SamplePath& z,
                                       std::span<const Partition> refinements) {
  require_same_grid(sigma, z, "integral_qv_residual");
  const SamplePath integral = stieltjes_integral(sigma, z);
  const Partition base = partition_of(z);

  ConvergenceReport report;
  for (std::size_t r = 0; r < refinements.size(); ++r) {
    const Partition& level = refinements[r];
    if (r > 0 && !refinements[r - 1].is_refined_by(level)) {
      throw InvariantViolation("refinement " + std::to_string(r) +
                               " does not refine its predecessor");
    }
    if (!level.is_refined_by(base)) {
      throw InvariantViolation("refinement " + std::to_string(r) +
                               " is not contained in the integration grid");
    }
    // Merge-walk the base grid to read I at the refinement times.
    const auto bt = base.times();
    const auto iv = integral.values();
    double qv = 0.0;
    double prev = iv[0];
    std::size_t j = 0;
    for (const double t : level.times().subspan(1)) {
      while (bt[j] != t) ++j;
      const double d = iv[j] - prev;
      qv += d * d;
      prev = iv[j];
    }
    report.grid_sizes.push_back(level.num_steps());
    report.residuals.push_back(qv);
  }
  report.slope = loglog_slope(std::span<const std::size_t>(report.grid_sizes),
                              std::span<const double>(report.residuals));
  return report;
}

FunctionIntegral function_of_z_integral(const C1Function& phi, const SamplePath& z) {
  const auto t = z.times();
  const auto v = z.values();
  std::vector<double> sums(v.size());
  double acc = 0.0;
  sums[0] = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    acc += checked(phi.value(v[i]), "phi", t[i]) * (v[i + 1] - v[i]);
    sums[i + 1] = acc;
  }
  FunctionIntegral out{z.with_values(std::move(sums)), std::nullopt};
  if (phi.antiderivative) {
    const double base = checked(phi.antiderivative(v[0]), "antiderivative", t[0]);
    std::vector<double> closed(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      closed[i] = checked(phi.antiderivative(v[i]), "antiderivative", t[i]) - base;
    }
    out.closed_form = z.with_values(std::move(closed));
  }
  return out;
}

double function_of_z_residual(const C1Function& phi, const SamplePath& z) {
  if (!phi.antiderivative) {
    throw NumericDomainError("function_of_z_residual needs an antiderivative");
  }
  const FunctionIntegral fi = function_of_z_integral(phi, z);
  return std::abs(fi.running_sum.back() - fi.closed_form->back());
}

}  // namespace fbmarb

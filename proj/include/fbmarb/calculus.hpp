#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fbmarb/sample_path.hpp"

namespace fbmarb {

/// Residual sequence over a nested sequence of grids.
struct ConvergenceReport {
  std::vector<std::size_t> grid_sizes;  // number of intervals, increasing
  std::vector<double> residuals;        // nonnegative
  double slope = 0.0;                   // log-log regression of residual on size
};

/// Least-squares slope of log(y) on log(x).  NaN when fewer than two points
/// or any y is not strictly positive.
double loglog_slope(std::span<const double> x, std::span<const double> y);
double loglog_slope(std::span<const std::size_t> x, std::span<const double> y);

/// Number of consecutive pairs with y[i+1] < y[i].
std::size_t count_decreasing_steps(std::span<const double> y);

/// Running left-point Stieltjes sum I_k = sum_{i<k} Y_i (X_{i+1} - X_i).
SamplePath stieltjes_integral(const SamplePath& integrand,
                              const SamplePath& integrator);

/// sum (Z_{i+1} - Z_i)^2 over the path's own grid.
double quadratic_variation(const SamplePath& path);

/// sum (W_{i+1} - W_i)(Z_{i+1} - Z_i).
double cross_variation(const SamplePath& w, const SamplePath& z);

/// F(t, z) with its two first partial derivatives supplied analytically.
struct SmoothField {
  std::function<double(double, double)> value;
  std::function<double(double, double)> d_time;
  std::function<double(double, double)> d_space;
};

/// |F(T,Z_T) - F(0,Z_0) - sum dF/dt(t_i,Z_i) dt - sum dF/dz(t_i,Z_i) dZ|,
/// the defect of the first-order chain rule on the path's grid.
double ito_formula_residual(const SmoothField& field, const SamplePath& z);

/// |int W dZ + int Z dW - (Z_T W_T - Z_0 W_0)| with left-point sums.
/// Algebraically equal to |sum dW dZ|.
double integration_by_parts_residual(const SamplePath& w, const SamplePath& z);

/// |int W dZ + int Z dW + sum dW dZ - (Z_T W_T - Z_0 W_0)|; zero up to
/// rounding for any pair of paths (discrete Abel summation).
double abel_identity_residual(const SamplePath& w, const SamplePath& z);

/// QV of the running integral int sigma dZ, built once on the sigma/z grid
/// and read at the times of each refinement.  Refinements must be ordered
/// coarse to fine, nested, and contained in the sigma/z grid.
ConvergenceReport integral_qv_residual(const SamplePath& sigma, const SamplePath& z,
                                       std::span<const Partition> refinements);

/// A C^1 scalar function; the antiderivative is optional.
struct C1Function {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::function<double(double)> antiderivative;  // may be empty
};

struct FunctionIntegral {
  SamplePath running_sum;                 // sum phi(Z_i) dZ
  std::optional<SamplePath> closed_form;  // Phi(Z_t) - Phi(Z_0)
};

FunctionIntegral function_of_z_integral(const C1Function& phi, const SamplePath& z);

/// |running_sum_T - closed_form_T|; requires an antiderivative.
double function_of_z_residual(const C1Function& phi, const SamplePath& z);

}  // namespace fbmarb

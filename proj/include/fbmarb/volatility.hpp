#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fbmarb/calculus.hpp"
#include "fbmarb/sample_path.hpp"

namespace fbmarb {

/// Registry of volatility maps sigma = phi(Z).
enum class PhiKind {
  kIdentity,    // phi(x) = x
  kAffine,      // phi(x) = a x + b
  kCos,         // phi(x) = cos x
  kExpBounded,  // phi(x) = exp(tanh x), values in [1/e, e]
};

struct NamedPhi {
  PhiKind kind = PhiKind::kIdentity;
  double a = 1.0;
  double b = 0.0;

  C1Function function() const;
  std::string name() const;
};

/// Looks up "identity", "affine", "cos" or "exp_bounded".
PhiKind phi_kind_from_name(const std::string& name);

struct ConstantVol {
  double level = 0.0;
};

/// CIR variance dv = kappa (theta - v) dt + xi sqrt(v) dB, sigma = sqrt(v).
struct HestonVol {
  double v0 = 0.04;
  double kappa = 1.5;
  double theta = 0.04;
  double xi = 0.3;
};

/// Lognormal variance d(sigma^2) = sigma^2 (mu dt + nu_vol dB).
struct HullWhiteVol {
  double sigma0 = 0.2;
  double mu = 0.0;
  double nu_vol = 0.3;
};

/// Ornstein-Uhlenbeck volatility d sigma = kappa (theta - sigma) dt + beta dB.
struct SteinSteinVol {
  double sigma0 = 0.2;
  double kappa = 1.0;
  double theta = 0.2;
  double beta = 0.1;
};

struct FunctionOfModulatorVol {
  NamedPhi phi;
};

using VolatilityModelSpec = std::variant<ConstantVol, HestonVol, HullWhiteVol,
                                         SteinSteinVol, FunctionOfModulatorVol>;

std::string model_name(const VolatilityModelSpec& model);

/// Every violated parameter-domain constraint, each naming its field.
std::vector<std::string> volatility_problems(const VolatilityModelSpec& model);

/// A simulated volatility path.  For the SDE kinds `drift` and `diffusion`
/// hold the coefficients of the driving state process (v for Heston,
/// sigma^2 for Hull-White, sigma for Stein-Stein) evaluated at each left
/// grid point; they are zero for the constant and function-of-modulator
/// kinds.
struct VolPath {
  SamplePath path;
  std::uint64_t driver_seed = 0;
  VolatilityModelSpec model;
  std::vector<double> drift;
  std::vector<double> diffusion;
  /// Raw scheme state at the grid points (may dip below zero for the
  /// untruncated CIR variance).
  std::vector<double> state;

  /// Coarser view that keeps left-point coefficient evaluations.
  VolPath subsample(std::size_t stride) const;
};

/// Constant: sigma == level.  Heston: full-truncation Euler on v.
/// Hull-White: exact lognormal step for sigma^2.  Stein-Stein: exact
/// Gaussian OU transition.  Function-of-modulator: sigma = phi(Z)
/// pointwise, requires `z` on the same grid and ignores the seed.
///
/// Throws ConfigError on parameter-domain violations or a missing z.
VolPath simulate_volatility(const VolatilityModelSpec& model, const Partition& grid,
                            std::uint64_t seed, const SamplePath* z = nullptr);

struct IntegrabilitySums {
  double abs_drift = 0.0;      // sum |mu_W| dt
  double squared_diffusion = 0.0;  // sum sigma_W^2 dt
};

IntegrabilitySums integrability_sums(const VolPath& vol);

/// True iff the path and both discrete integrals are finite and strictly
/// below the given bounds.
bool integrability_check(const VolPath& vol, double mu_bound, double sigma2_bound);

}  // namespace fbmarb

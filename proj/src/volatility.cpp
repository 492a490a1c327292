#include "fbmarb/volatility.hpp"

#include <cmath>

#include <fmt/format.h>

#include "fbmarb/errors.hpp"
#include "fbmarb/seeding.hpp"

namespace fbmarb {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require(std::vector<std::string>& problems, bool ok, const char* field,
             const char* range, double value) {
  if (!ok) problems.push_back(fmt::format("{} must be {}, got {}", field, range, value));
}

}  // namespace

C1Function NamedPhi::function() const {
  switch (kind) {
    case PhiKind::kIdentity:
      return {[](double x) { return x; }, [](double) { return 1.0; },
              [](double x) { return 0.5 * x * x; }};
    case PhiKind::kAffine:
      return {[a = a, b = b](double x) { return a * x + b; },
              [a = a](double) { return a; },
              [a = a, b = b](double x) { return 0.5 * a * x * x + b * x; }};
    case PhiKind::kCos:
      return {[](double x) { return std::cos(x); },
              [](double x) { return -std::sin(x); },
              [](double x) { return std::sin(x); }};
    case PhiKind::kExpBounded:
      return {[](double x) { return std::exp(std::tanh(x)); },
              [](double x) {
                const double th = std::tanh(x);
                return std::exp(th) * (1.0 - th * th);
              },
              {}};
  }
  throw InvariantViolation("unknown phi kind");
}

std::string NamedPhi::name() const {
  switch (kind) {
    case PhiKind::kIdentity: return "identity";
    case PhiKind::kAffine: return "affine";
    case PhiKind::kCos: return "cos";
    case PhiKind::kExpBounded: return "exp_bounded";
  }
  return "unknown";
}

PhiKind phi_kind_from_name(const std::string& name) {
  if (name == "identity") return PhiKind::kIdentity;
  if (name == "affine") return PhiKind::kAffine;
  if (name == "cos") return PhiKind::kCos;
  if (name == "exp_bounded") return PhiKind::kExpBounded;
  throw ConfigError({"volatility.phi must be one of identity, affine, cos, "
                     "exp_bounded; got \"" + name + "\""});
}

std::string model_name(const VolatilityModelSpec& model) {
  return std::visit(overloaded{
                        [](const ConstantVol&) { return std::string("constant"); },
                        [](const HestonVol&) { return std::string("heston"); },
                        [](const HullWhiteVol&) { return std::string("hull_white"); },
                        [](const SteinSteinVol&) { return std::string("stein_stein"); },
                        [](const FunctionOfModulatorVol&) {
                          return std::string("function_of_modulator");
                        },
                    },
                    model);
}

std::vector<std::string> volatility_problems(const VolatilityModelSpec& model) {
  std::vector<std::string> p;
  std::visit(overloaded{
                 [&](const ConstantVol& m) {
                   require(p, m.level >= 0.0 && std::isfinite(m.level),
                           "volatility.level", ">= 0", m.level);
                 },
                 [&](const HestonVol& m) {
                   require(p, m.v0 > 0.0 && std::isfinite(m.v0), "volatility.v0", "> 0", m.v0);
                   require(p, m.kappa >= 0.0 && std::isfinite(m.kappa), "volatility.kappa", ">= 0", m.kappa);
                   require(p, m.theta >= 0.0 && std::isfinite(m.theta), "volatility.theta", ">= 0", m.theta);
                   require(p, m.xi >= 0.0 && std::isfinite(m.xi), "volatility.xi", ">= 0", m.xi);
                 },
                 [&](const HullWhiteVol& m) {
                   require(p, m.sigma0 > 0.0 && std::isfinite(m.sigma0), "volatility.sigma0", "> 0", m.sigma0);
                   require(p, std::isfinite(m.mu), "volatility.mu", "finite", m.mu);
                   require(p, std::isfinite(m.nu_vol), "volatility.nu_vol", "finite", m.nu_vol);
                 },
                 [&](const SteinSteinVol& m) {
                   require(p, std::isfinite(m.sigma0), "volatility.sigma0", "finite", m.sigma0);
                   require(p, m.kappa >= 0.0 && std::isfinite(m.kappa), "volatility.kappa", ">= 0", m.kappa);
                   require(p, std::isfinite(m.theta), "volatility.theta", "finite", m.theta);
                   require(p, m.beta >= 0.0 && std::isfinite(m.beta), "volatility.beta", ">= 0", m.beta);
                 },
                 [&](const FunctionOfModulatorVol& m) {
                   require(p, std::isfinite(m.phi.a), "volatility.a", "finite", m.phi.a);
                   require(p, std::isfinite(m.phi.b), "volatility.b", "finite", m.phi.b);
                 },
             },
             model);
  return p;
}

VolPath VolPath::subsample(std::size_t stride) const {
  VolPath out{path.subsample(stride), driver_seed, model, {}, {}, {}};
  const std::size_t n = out.path.size();
  out.state.resize(n);
  out.drift.resize(n - 1);
  out.diffusion.resize(n - 1);
  for (std::size_t j = 0; j < n; ++j) out.state[j] = state[j * stride];
  for (std::size_t j = 0; j + 1 < n; ++j) {
    out.drift[j] = drift[j * stride];
    out.diffusion[j] = diffusion[j * stride];
  }
  return out;
}

VolPath simulate_volatility(const VolatilityModelSpec& model, const Partition& grid,
                            std::uint64_t seed, const SamplePath* z) {
  if (auto problems = volatility_problems(model); !problems.empty()) {
    throw ConfigError(std::move(problems));
  }
  const auto t = grid.times();
  const std::size_t steps = grid.num_steps();
  VolPath out{grid.constant(0.0), seed, model, std::vector<double>(steps, 0.0),
              std::vector<double>(steps, 0.0), std::vector<double>(grid.size(), 0.0)};
  std::vector<double> sigma(grid.size());

  const auto brownian = [&] {
    std::vector<double> db = standard_normals(seed, steps);
    for (std::size_t i = 0; i < steps; ++i) db[i] *= std::sqrt(t[i + 1] - t[i]);
    return db;
  };

  std::visit(
      overloaded{
          [&](const ConstantVol& m) {
            std::ranges::fill(sigma, m.level);
            std::ranges::fill(out.state, m.level);
          },
          [&](const HestonVol& m) {
            const std::vector<double> db = brownian();
            double v = m.v0;
            for (std::size_t i = 0; i <= steps; ++i) {
              const double vp = std::max(v, 0.0);
              out.state[i] = v;
              sigma[i] = std::sqrt(vp);
              if (i == steps) break;
              out.drift[i] = m.kappa * (m.theta - vp);
              out.diffusion[i] = m.xi * std::sqrt(vp);
              v += out.drift[i] * (t[i + 1] - t[i]) + out.diffusion[i] * db[i];
            }
          },
          [&](const HullWhiteVol& m) {
            const std::vector<double> db = brownian();
            double s2 = m.sigma0 * m.sigma0;
            for (std::size_t i = 0; i <= steps; ++i) {
              out.state[i] = s2;
              sigma[i] = std::sqrt(s2);
              if (i == steps) break;
              out.drift[i] = m.mu * s2;
              out.diffusion[i] = m.nu_vol * s2;
              const double dt = t[i + 1] - t[i];
              s2 *= std::exp((m.mu - 0.5 * m.nu_vol * m.nu_vol) * dt + m.nu_vol * db[i]);
            }
          },
          [&](const SteinSteinVol& m) {
            const std::vector<double> xi = standard_normals(seed, steps);
            double s = m.sigma0;
            for (std::size_t i = 0; i <= steps; ++i) {
              out.state[i] = s;
              sigma[i] = s;
              if (i == steps) break;
              out.drift[i] = m.kappa * (m.theta - s);
              out.diffusion[i] = m.beta;
              const double dt = t[i + 1] - t[i];
              if (m.kappa > 0.0) {
                const double decay = std::exp(-m.kappa * dt);
                const double sd =
                    m.beta * std::sqrt(-std::expm1(-2.0 * m.kappa * dt) / (2.0 * m.kappa));
                s = m.theta + (s - m.theta) * decay + sd * xi[i];
              } else {
                s += m.beta * std::sqrt(dt) * xi[i];
              }
            }
          },
          [&](const FunctionOfModulatorVol& m) {
            if (z == nullptr) {
              throw ConfigError({"volatility.kind function_of_modulator needs the "
                                 "modulator path"});
            }
            if (!std::ranges::equal(z->times(), t)) {
              throw GridMismatchError("simulate_volatility: modulator not on the grid");
            }
            const C1Function phi = m.phi.function();
            const auto zv = z->values();
            for (std::size_t i = 0; i <= steps; ++i) {
              sigma[i] = phi.value(zv[i]);
              if (!std::isfinite(sigma[i])) {
                throw NumericDomainError(fmt::format("phi(Z) not finite at t={}", t[i]));
              }
            }
            out.state = sigma;
          },
      },
      model);
  out.path = out.path.with_values(std::move(sigma));
  return out;
}

IntegrabilitySums integrability_sums(const VolPath& vol) {
  const auto t = vol.path.times();
  IntegrabilitySums s;
  for (std::size_t i = 0; i + 1 < t.size() && i < vol.drift.size(); ++i) {
    const double dt = t[i + 1] - t[i];
    s.abs_drift += std::abs(vol.drift[i]) * dt;
    s.squared_diffusion += vol.diffusion[i] * vol.diffusion[i] * dt;
  }
  return s;
}

bool integrability_check(const VolPath& vol, double mu_bound, double sigma2_bound) {
  for (const double v : vol.path.values()) {
    if (!std::isfinite(v)) return false;
  }
  const IntegrabilitySums s = integrability_sums(vol);
  return std::isfinite(s.abs_drift) && std::isfinite(s.squared_diffusion) &&
         s.abs_drift < mu_bound && s.squared_diffusion < sigma2_bound;
}

}  // namespace fbmarb

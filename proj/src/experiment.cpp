#include "fbmarb/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

#include <fmt/format.h>

#include "fbmarb/calculus.hpp"
#include "fbmarb/errors.hpp"
#include "fbmarb/fbm.hpp"
#include "fbmarb/market.hpp"
#include "fbmarb/seeding.hpp"
#include "fbmarb/volatility.hpp"

namespace fbmarb {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Runs task(i) for i in [0, count) on a small pool.  Each task writes only
/// its own output slot, so the result does not depend on scheduling.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  }
}

/// Produces the finest-level modulator for each ensemble index.
class ModulatorSource {
 public:
  ModulatorSource(const ExperimentConfig& cfg, const Partition& fine)
      : cfg_(cfg), fine_(fine) {
    const ModulatorSpec& m = cfg.modulator;
    const bool identity_clock = m.kind == ModulatorSpec::Kind::kTimeChanged &&
                                m.time_change.kind == TimeChangeSpec::Kind::kIdentity;
    if (m.kind == ModulatorSpec::Kind::kFbm || identity_clock) {
      // B^H_{A_t} with A_t = t is B^H on the grid itself.
      uniform_ = std::make_shared<const UniformFbmSampler>(m.hurst, fine.horizon(),
                                                           fine.num_steps());
    } else if (m.time_change.kind == TimeChangeSpec::Kind::kPower) {
      time_changed_ = std::make_shared<const TimeChangedFbmSampler>(
          TimeChange::power(fine, m.time_change.p), m.hurst);
      report_ = time_changed_->report();
    }
  }

  /// The report out-parameter receives the factorization used for this path.
  SamplePath sample(std::size_t index, FactorizationReport& report) const {
    const std::uint64_t seed = derive_seed(cfg_.master_seed, Stream::kModulator, index);
    if (uniform_) return uniform_->sample(seed);
    if (time_changed_) {
      report = report_;
      return time_changed_->sample(seed);
    }
    const TimeChange clock = integrated_cir_time_change(
        fine_, cfg_.modulator.time_change.cir,
        derive_seed(cfg_.master_seed, Stream::kTimeChangeClock, index));
    const TimeChangedFbmSampler sampler(clock, cfg_.modulator.hurst);
    report = sampler.report();
    return sampler.sample(seed);
  }

  const FactorizationReport& shared_report() const { return report_; }

 private:
  const ExperimentConfig& cfg_;
  Partition fine_;
  std::shared_ptr<const UniformFbmSampler> uniform_;
  std::shared_ptr<const TimeChangedFbmSampler> time_changed_;
  FactorizationReport report_;
};

std::size_t stride_for(int finest, int level) {
  return std::size_t{1} << (finest - level);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::ranges::sort(v);
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> level_sizes(const std::vector<int>& levels) {
  std::vector<double> out;
  for (const int k : levels) out.push_back(std::ldexp(1.0, k));
  return out;
}

/// Verdict for a sequence that should shrink under refinement: at most
/// `allowed` of the consecutive steps may fail to decrease.
Verdict decreasing_verdict(std::string name, const std::vector<double>& y,
                           std::size_t allowed) {
  const std::size_t steps = y.empty() ? 0 : y.size() - 1;
  const std::size_t down = count_decreasing_steps(y);
  Verdict v{std::move(name), steps - down <= allowed && !y.empty(), false,
            fmt::format("{} of {} refinement steps decrease (allowed non-decreasing: {})",
                        down, steps, allowed)};
  return v;
}

struct SeedOutcome {
  std::vector<TerminalRecord> terminal;
  std::vector<double> maxabs;  // per level, NaN when the level failed
  std::vector<double> qv;      // per level
  std::vector<RunFailure> failures;
  FactorizationReport factorization;
};

}  // namespace

int RunReport::exit_code() const {
  bool statistical = false;
  bool consistency = false;
  for (const auto& f : failures) {
    if (f.kind == "internal_consistency") consistency = true;
  }
  for (const auto& v : verdicts) {
    if (v.passed) continue;
    (v.consistency ? consistency : statistical) = true;
  }
  if (consistency) return kExitConsistencyFailure;
  if (statistical) return kExitStatisticalFailure;
  return kExitPass;
}

RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  if (!(config.modulator.hurst > 0.5 && config.modulator.hurst < 1.0)) {
    throw ConfigError({fmt::format(
        "modulator.hurst must lie in (0.5, 1) for the arbitrage experiment, got {}",
        config.modulator.hurst)});
  }
  const auto& levels = config.grid_levels;
  const int finest = config.finest_level();
  const Partition fine = Partition::dyadic(config.market.horizon, finest);
  std::vector<Partition> refinements;
  for (const int k : levels) refinements.push_back(Partition::dyadic(config.market.horizon, k));

  const ModulatorSource modulator(config, fine);
  std::vector<SeedOutcome> outcomes(config.num_seeds);

  parallel_for(config.num_seeds, options.threads, [&](std::size_t index) {
    SeedOutcome& out = outcomes[index];
    out.maxabs.assign(levels.size(), kNaN);
    out.qv.assign(levels.size(), kNaN);
    const auto record_all_levels = [&](const std::string& kind, const std::string& msg) {
      out.terminal.clear();
      for (const int k : levels) {
        out.terminal.push_back({index, k, kNaN, kNaN, false, CertificateStatus::kFailed});
        out.failures.push_back({index, k, kind, msg});
      }
    };

    SamplePath z;
    VolPath vol;
    try {
      z = modulator.sample(index, out.factorization);
      vol = simulate_volatility(config.volatility, fine,
                                derive_seed(config.master_seed, Stream::kVolatilityDriver, index),
                                &z);
    } catch (const FactorizationError& e) {
      record_all_levels("factorization", e.what());
      return;
    }
    if (!integrability_check(vol, config.thresholds.integrability_bound,
                             config.thresholds.integrability_bound)) {
      record_all_levels("integrability_rejected",
                        "volatility coefficient integrals not finite or above bound");
      return;
    }

    const ConvergenceReport qv = integral_qv_residual(vol.path, z, refinements);
    out.qv = qv.residuals;

    for (std::size_t li = 0; li < levels.size(); ++li) {
      const int k = levels[li];
      const std::size_t stride = stride_for(finest, k);
      TerminalRecord rec{index, k, kNaN, kNaN, false, CertificateStatus::kFailed};
      try {
        const VolPath coarse_vol = stride == 1 ? vol : vol.subsample(stride);
        const SamplePath coarse_z = stride == 1 ? z : z.subsample(stride);
        const MarketPaths market =
            price_path(config.market, coarse_vol, coarse_z, config.modulator.hurst);
        const PortfolioTrajectory traj = portfolio_value(market, config.strategy);
        const ArbitrageCertificate cert = arbitrage_certificate(traj);
        rec.terminal_wealth = cert.terminal_wealth;
        rec.exponent = cert.terminal_exponent;
        rec.cert_pass = cert.passed();
        rec.status = cert.status;
        out.maxabs[li] = summarize(traj.sf_residuals).max_abs;
        if (!cert.passed()) {
          out.failures.push_back({index, k, "certificate",
                                  fmt::format("{} at t={}", cert.message,
                                              cert.failure_time.value_or(kNaN))});
        }
      } catch (const InternalConsistencyError& e) {
        out.failures.push_back({index, k, "internal_consistency", e.what()});
      } catch (const NumericOverflowError& e) {
        out.failures.push_back({index, k, "numeric_overflow", e.what()});
      }
      out.terminal.push_back(rec);
    }
  });

  RunReport report;
  report.command = "simulate";
  report.config = config;
  report.factorization = modulator.shared_report();
  std::vector<std::vector<double>> maxabs(levels.size()), qv(levels.size());
  for (auto& o : outcomes) {
    report.terminal.insert(report.terminal.end(), o.terminal.begin(), o.terminal.end());
    report.failures.insert(report.failures.end(), o.failures.begin(), o.failures.end());
    report.factorization.jitter_retries =
        std::max(report.factorization.jitter_retries, o.factorization.jitter_retries);
    report.factorization.jitter = std::max(report.factorization.jitter, o.factorization.jitter);
    for (std::size_t li = 0; li < levels.size(); ++li) {
      if (!std::isnan(o.maxabs[li])) maxabs[li].push_back(o.maxabs[li]);
      if (!std::isnan(o.qv[li])) qv[li].push_back(o.qv[li]);
    }
  }

  std::vector<double> mean_maxabs, mean_qv;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    LevelStats s{levels[li], mean(maxabs[li]), median(maxabs[li]),
                 maxabs[li].empty() ? kNaN : std::ranges::max(maxabs[li]), mean(qv[li])};
    report.levels.push_back(s);
    mean_maxabs.push_back(s.mean_maxabs);
    mean_qv.push_back(s.qv_of_integral);
  }
  const std::vector<double> sizes = level_sizes(levels);
  report.slopes["self_financing_mean_maxabs"] = loglog_slope(sizes, mean_maxabs);
  report.slopes["qv_of_integral"] = loglog_slope(sizes, mean_qv);

  const Thresholds& th = config.thresholds;
  const std::size_t failed_certs = static_cast<std::size_t>(
      std::ranges::count_if(report.terminal, [](const auto& r) { return !r.cert_pass; }));
  report.verdicts.push_back(
      {"arbitrage_certificates", failed_certs == 0, false,
       fmt::format("{} of {} (seed, level) certificates failed", failed_certs,
                   report.terminal.size())});

  const bool degenerate = std::ranges::all_of(
      mean_maxabs, [&](double v) { return v <= th.exact_tolerance; });
  if (degenerate) {
    report.verdicts.push_back({"self_financing_convergence", true, false,
                               fmt::format("all residuals <= {}", th.exact_tolerance)});
  } else {
    report.verdicts.push_back(decreasing_verdict("self_financing_convergence", mean_maxabs,
                                                 th.max_monotonicity_violations));
  }

  if (levels.size() >= 2) {
    const double first = mean_qv.front();
    const double last = mean_qv.back();
    const bool zero = first == 0.0 && last == 0.0;
    report.verdicts.push_back(
        {"integral_qv_reduction", zero || last < th.integral_qv_ratio * first, false,
         fmt::format("mean QV of int sigma dZ: {} at 2^{}, {} at 2^{} (required ratio < {})",
                     first, levels.front(), last, levels.back(), th.integral_qv_ratio)});
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

// ---------------------------------------------------------------------------

namespace {

struct Verifier {
  const char* name;
  bool exact;        // residual must vanish up to exact_tolerance
  bool decreasing;   // residual must shrink under refinement (H > 1/2)
};

constexpr Verifier kVerifiers[] = {
    {"qv", false, true},
    {"ito_z", true, false},
    {"ito_t", true, false},
    {"ito_z2", false, true},
    {"ito_tz", false, true},
    {"ito_exp", false, true},
    {"ito_t2_sin", false, true},
    {"abel_identity", true, false},
    {"ibp_cross", false, true},
    {"integral_qv", false, true},
    {"phi_identity", false, true},
    {"phi_cos", false, true},
    {"phi_identity_fixture", false, true},
};
constexpr std::size_t kNumVerifiers = std::size(kVerifiers);

const SmoothField kFieldZ{[](double, double z) { return z; }, [](double, double) { return 0.0; },
                          [](double, double) { return 1.0; }};
const SmoothField kFieldT{[](double t, double) { return t; }, [](double, double) { return 1.0; },
                          [](double, double) { return 0.0; }};
const SmoothField kFieldZ2{[](double, double z) { return z * z; },
                           [](double, double) { return 0.0; },
                           [](double, double z) { return 2.0 * z; }};
const SmoothField kFieldTZ{[](double t, double z) { return t * z; },
                           [](double, double z) { return z; }, [](double t, double) { return t; }};
const SmoothField kFieldExp{[](double, double z) { return std::exp(z); },
                            [](double, double) { return 0.0; },
                            [](double, double z) { return std::exp(z); }};
const SmoothField kFieldT2Sin{[](double t, double z) { return t * t + std::sin(z); },
                              [](double t, double) { return 2.0 * t; },
                              [](double, double z) { return std::cos(z); }};

/// Terminal value used by the phi = identity fixture.
constexpr double kFixtureTerminal = 0.8;

}  // namespace

RunReport run_calculus_suite(const ExperimentConfig& config, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const auto& levels = config.grid_levels;
  const int finest = config.finest_level();
  const double horizon = config.market.horizon;
  const Partition fine = Partition::dyadic(horizon, finest);
  std::vector<Partition> refinements;
  for (const int k : levels) refinements.push_back(Partition::dyadic(horizon, k));

  const ModulatorSource modulator(config, fine);
  const C1Function identity = NamedPhi{PhiKind::kIdentity}.function();
  const C1Function cosine = NamedPhi{PhiKind::kCos}.function();

  // residuals[seed][verifier][level]
  std::vector<std::array<std::vector<double>, kNumVerifiers>> residuals(config.num_seeds);
  std::vector<RunFailure> failures;
  std::vector<FactorizationReport> fact(config.num_seeds);
  std::vector<std::string> errors(config.num_seeds);

  parallel_for(config.num_seeds, options.threads, [&](std::size_t index) {
    auto& res = residuals[index];
    for (auto& r : res) r.assign(levels.size(), kNaN);
    try {
      const SamplePath z = modulator.sample(index, fact[index]);
      const VolPath vol = simulate_volatility(
          config.volatility, fine,
          derive_seed(config.master_seed, Stream::kVolatilityDriver, index), &z);

      const auto t = fine.times();
      std::vector<double> w(fine.size(), 0.0), fixture(fine.size());
      const std::vector<double> dw = standard_normals(
          derive_seed(config.master_seed, Stream::kAuxiliaryBrownian, index), fine.num_steps());
      for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        w[i + 1] = w[i] + std::sqrt(t[i + 1] - t[i]) * dw[i];
      }
      // Z plus a linear drift pinning the terminal value; adding a smooth
      // finite-variation term leaves the quadratic variation at zero.
      const double shift = kFixtureTerminal - z.back();
      for (std::size_t i = 0; i < fixture.size(); ++i) {
        fixture[i] = z[i] + shift * (t[i] / horizon);
      }
      const SamplePath brownian = z.with_values(std::move(w));
      const SamplePath pinned = z.with_values(std::move(fixture));

      const ConvergenceReport iqv = integral_qv_residual(vol.path, z, refinements);

      for (std::size_t li = 0; li < levels.size(); ++li) {
        const std::size_t stride = stride_for(finest, levels[li]);
        const SamplePath zc = z.subsample(stride);
        const SamplePath wc = brownian.subsample(stride);
        const SamplePath pc = pinned.subsample(stride);
        const double values[kNumVerifiers] = {
            quadratic_variation(zc),
            ito_formula_residual(kFieldZ, zc),
            ito_formula_residual(kFieldT, zc),
            ito_formula_residual(kFieldZ2, zc),
            ito_formula_residual(kFieldTZ, zc),
            ito_formula_residual(kFieldExp, zc),
            ito_formula_residual(kFieldT2Sin, zc),
            abel_identity_residual(wc, zc),
            integration_by_parts_residual(wc, zc),
            iqv.residuals[li],
            function_of_z_residual(identity, zc),
            function_of_z_residual(cosine, zc),
            std::abs(stieltjes_integral(pc, pc).back() -
                     0.5 * kFixtureTerminal * kFixtureTerminal),
        };
        for (std::size_t v = 0; v < kNumVerifiers; ++v) res[v][li] = values[v];
      }
    } catch (const Error& e) {
      errors[index] = e.what();
    }
  });

  RunReport report;
  report.command = "calculus";
  report.config = config;
  report.factorization = modulator.shared_report();
  for (std::size_t s = 0; s < config.num_seeds; ++s) {
    if (!errors[s].empty()) report.failures.push_back({s, 0, "seed_error", errors[s]});
    report.factorization.jitter_retries =
        std::max(report.factorization.jitter_retries, fact[s].jitter_retries);
    report.factorization.jitter = std::max(report.factorization.jitter, fact[s].jitter);
  }

  const std::vector<double> sizes = level_sizes(levels);
  const Thresholds& th = config.thresholds;
  const double hurst = config.modulator.hurst;
  for (std::size_t v = 0; v < kNumVerifiers; ++v) {
    std::vector<double> means;
    double worst = 0.0;
    for (std::size_t li = 0; li < levels.size(); ++li) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t s = 0; s < config.num_seeds; ++s) {
        const double r = residuals[s][v][li];
        if (std::isnan(r)) continue;
        sum += r;
        worst = std::max(worst, r);
        ++count;
      }
      means.push_back(count ? sum / static_cast<double>(count) : kNaN);
      const double slope = loglog_slope(std::span(sizes).first(li + 1),
                                        std::span<const double>(means));
      report.calculus.push_back({kVerifiers[v].name, levels[li], means.back(), slope});
    }
    report.slopes[kVerifiers[v].name] = loglog_slope(sizes, means);

    if (kVerifiers[v].exact) {
      report.verdicts.push_back({std::string(kVerifiers[v].name) + "_exact",
                                 worst <= th.exact_tolerance, true,
                                 fmt::format("max residual {} (tolerance {})", worst,
                                             th.exact_tolerance)});
    } else if (kVerifiers[v].decreasing && hurst > 0.5) {
      report.verdicts.push_back(decreasing_verdict(
          std::string(kVerifiers[v].name) + "_decreasing", means,
          th.max_monotonicity_violations));
    }
    if (std::string_view(kVerifiers[v].name) == "qv") {
      const double slope = report.slopes["qv"];
      const double expected = 1.0 - 2.0 * hurst;
      report.verdicts.push_back(
          {"qv_slope", std::abs(slope - expected) <= th.qv_slope_tolerance, false,
           fmt::format("log-log slope {} vs 1-2H = {} (tolerance {})", slope, expected,
                       th.qv_slope_tolerance)});
    }
  }
  if (!report.failures.empty()) {
    report.verdicts.push_back({"seed_errors", false, true,
                               fmt::format("{} seeds raised errors", report.failures.size())});
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace fbmarb

#include "fbmarb/fbm.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include <Eigen/Cholesky>

#include "fbmarb/errors.hpp"
#include "fbmarb/seeding.hpp"

namespace fbmarb {

namespace {

// FFTW's planner is not thread-safe; plan execution on fresh arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (data == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

double half_power(double x, double two_h) { return std::pow(std::abs(x), two_h); }

}  // namespace

void require_hurst_in_unit_interval(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    throw ParameterDomainError("hurst must lie in the open interval (0, 1), got " +
                               std::to_string(hurst));
  }
}

void FbmSpec::validate() const {
  require_hurst_in_unit_interval(hurst);
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ParameterDomainError("horizon must be positive and finite");
  }
  if (num_steps == 0) throw ParameterDomainError("num_steps must be >= 1");
}

double fgn_autocovariance(std::size_t lag, double hurst) {
  require_hurst_in_unit_interval(hurst);
  const double k = static_cast<double>(lag);
  const double two_h = 2.0 * hurst;
  return 0.5 * (half_power(k + 1.0, two_h) - 2.0 * half_power(k, two_h) +
                half_power(k - 1.0, two_h));
}

// ---------------------------------------------------------------------------
// Covariance factorization

GridFbmSampler::GridFbmSampler(std::vector<double> times, double hurst)
    : times_(std::move(times)), hurst_(hurst) {
  require_hurst_in_unit_interval(hurst_);
  if (times_.empty()) throw InvariantViolation("fBm grid is empty");
  if (!(times_.front() >= 0.0)) {
    throw InvariantViolation("fBm grid times must be nonnegative");
  }
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1]) || !std::isfinite(times_[i])) {
      throw InvariantViolation("fBm grid not strictly increasing at index " +
                               std::to_string(i));
    }
  }
  starts_at_zero_ = times_.front() == 0.0;

  // Knots u_0 = 0 < u_1 < ... < u_m; increments over [u_{j-1}, u_j].
  std::vector<double> u;
  u.reserve(times_.size() + 1);
  if (!starts_at_zero_) u.push_back(0.0);
  u.insert(u.end(), times_.begin(), times_.end());
  const auto m = static_cast<Eigen::Index>(u.size() - 1);
  if (m == 0) {
    lower_ = std::make_shared<const Eigen::MatrixXd>(0, 0);
    return;
  }

  const double two_h = 2.0 * hurst_;
  // Lower triangle only; the factorization runs in place to keep a single
  // dense matrix alive.
  const auto build = [&](Eigen::MatrixXd& cov) {
    cov.resize(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index k = 0; k <= j; ++k) {
        const double a = u[j], b = u[j + 1], c = u[k], d = u[k + 1];
        cov(j, k) = 0.5 * (half_power(d - a, two_h) + half_power(c - b, two_h) -
                           half_power(d - b, two_h) - half_power(c - a, two_h));
      }
    }
  };

  auto factor = std::make_shared<Eigen::MatrixXd>();
  constexpr int kMaxRetries = 3;
  double jitter = 0.0;
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    if (attempt > 0) jitter = attempt == 1 ? 1e-12 : 2.0 * jitter;
    build(*factor);
    const double mean_diag = factor->diagonal().mean();
    factor->diagonal().array() += jitter * mean_diag;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>, Eigen::Lower> llt(*factor);
    if (llt.info() == Eigen::Success) {
      report_ = {attempt, jitter};
      lower_ = std::move(factor);
      return;
    }
  }
  throw FactorizationError("fBm covariance is not numerically positive definite (" +
                           std::to_string(m) + " increments, H=" +
                           std::to_string(hurst_) + ") after " +
                           std::to_string(kMaxRetries) + " jitter retries up to " +
                           std::to_string(jitter) + " x mean variance");
}

std::vector<double> GridFbmSampler::sample_values(std::uint64_t seed) const {
  return sample_values(standard_normals(seed, static_cast<std::size_t>(lower_->rows())));
}

std::vector<double> GridFbmSampler::sample_values(std::span<const double> normals) const {
  const auto m = lower_->rows();
  if (static_cast<Eigen::Index>(normals.size()) != m) {
    throw InvariantViolation("expected " + std::to_string(m) + " normals");
  }
  const Eigen::Map<const Eigen::VectorXd> xi(normals.data(), m);
  const Eigen::VectorXd increments = lower_->triangularView<Eigen::Lower>() * xi;

  std::vector<double> out(times_.size());
  double level = 0.0;
  std::size_t pos = 0;
  if (starts_at_zero_) out[pos++] = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    level += increments[j];
    out[pos++] = level;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Circulant embedding

struct CirculantFbmSampler::Plan {
  explicit Plan(std::size_t n) : size(n) {
    FftwBuffer in(n), out(n);
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), in.data, out.data, FFTW_FORWARD,
                            FFTW_ESTIMATE);
    if (plan == nullptr) throw InternalConsistencyError("FFTW planning failed");
  }
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  void execute(fftw_complex* in, fftw_complex* out) const {
    fftw_execute_dft(plan, in, out);
  }

  std::size_t size;
  fftw_plan plan;
};

CirculantFbmSampler::CirculantFbmSampler(double hurst, double horizon,
                                         std::size_t num_steps)
    : hurst_(hurst),
      horizon_(horizon),
      num_steps_(num_steps),
      grid_(Partition::uniform(horizon, num_steps)) {
  FbmSpec{hurst, horizon, num_steps, 0}.validate();
  const std::size_t n = num_steps_;
  const std::size_t m = 2 * n;
  plan_ = std::make_shared<Plan>(m);

  // First row of the circulant: gamma(0..n), gamma(n-1..1).
  FftwBuffer row(m), spectrum(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t lag = j <= n ? j : m - j;
    row.data[j][0] = fgn_autocovariance(lag, hurst_);
    row.data[j][1] = 0.0;
  }
  plan_->execute(row.data, spectrum.data);

  double max_eig = 0.0;
  for (std::size_t k = 0; k < m; ++k) max_eig = std::max(max_eig, spectrum.data[k][0]);
  sqrt_eigen_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    double lambda = spectrum.data[k][0];
    if (lambda < 0.0) {
      if (lambda < -1e-10 * max_eig) {
        throw InternalConsistencyError(
            "circulant embedding has negative eigenvalue " + std::to_string(lambda) +
            " at index " + std::to_string(k) +
            "; use the covariance factorization sampler instead");
      }
      lambda = 0.0;  // rounding noise
    }
    sqrt_eigen_[k] = std::sqrt(lambda / static_cast<double>(m));
  }
}

CirculantFbmSampler::~CirculantFbmSampler() = default;
CirculantFbmSampler::CirculantFbmSampler(const CirculantFbmSampler&) = default;

std::vector<double> CirculantFbmSampler::sample_fgn(std::uint64_t seed) const {
  const std::size_t m = sqrt_eigen_.size();
  FftwBuffer in(m), out(m);
  Engine engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 0; k < m; ++k) {
    const double a = normal(engine);
    const double b = normal(engine);
    in.data[k][0] = sqrt_eigen_[k] * a;
    in.data[k][1] = sqrt_eigen_[k] * b;
  }
  plan_->execute(in.data, out.data);
  // The real part has covariance sum_k (lambda_k/m) cos(2 pi k (j-l)/m),
  // which is the circulant row, i.e. gamma(|j-l|) for |j-l| <= n.
  std::vector<double> fgn(num_steps_);
  for (std::size_t j = 0; j < num_steps_; ++j) fgn[j] = out.data[j][0];
  return fgn;
}

SamplePath CirculantFbmSampler::sample(std::uint64_t seed) const {
  const std::vector<double> fgn = sample_fgn(seed);
  const double scale = std::pow(horizon_ / static_cast<double>(num_steps_), hurst_);
  std::vector<double> values(num_steps_ + 1);
  values[0] = 0.0;
  double level = 0.0;
  for (std::size_t j = 0; j < num_steps_; ++j) {
    level += fgn[j];
    values[j + 1] = scale * level;
  }
  return grid_.constant(0.0).with_values(std::move(values));
}

// ---------------------------------------------------------------------------

UniformFbmSampler::UniformFbmSampler(double hurst, double horizon,
                                     std::size_t num_steps)
    : grid_(Partition::uniform(horizon, num_steps)), method_(FbmMethod::kCholesky) {
  FbmSpec{hurst, horizon, num_steps, 0}.validate();
  const auto cholesky = [&] {
    std::vector<double> t(grid_.times().begin(), grid_.times().end());
    cholesky_ = std::make_shared<const GridFbmSampler>(std::move(t), hurst);
    method_ = FbmMethod::kCholesky;
  };
  if (num_steps <= kSmallGrid) {
    cholesky();
    return;
  }
  try {
    circulant_ = std::make_shared<const CirculantFbmSampler>(hurst, horizon, num_steps);
    method_ = FbmMethod::kCirculantEmbedding;
  } catch (const InternalConsistencyError&) {
    if (num_steps > kMaxCholeskySteps) throw;
    cholesky();
  }
}

SamplePath UniformFbmSampler::sample(std::uint64_t seed) const {
  if (circulant_) return circulant_->sample(seed);
  return grid_.constant(0.0).with_values(cholesky_->sample_values(seed));
}

SamplePath generate_fbm(const FbmSpec& spec) {
  return UniformFbmSampler(spec).sample(spec.seed);
}

SamplePath generate_fbm_on_grid(std::span<const double> times, double hurst,
                                std::uint64_t seed) {
  std::vector<double> t(times.begin(), times.end());
  if (t.empty() || t.front() != 0.0) {
    throw InvariantViolation(
        "generate_fbm_on_grid returns a path, whose grid must start at 0; use "
        "GridFbmSampler::sample_values for grids starting later");
  }
  GridFbmSampler sampler(t, hurst);
  return SamplePath(std::move(t), sampler.sample_values(seed));
}

// ---------------------------------------------------------------------------
// Time changes

TimeChange::TimeChange(SamplePath clock) : clock_(std::move(clock)) {
  const auto a = clock_.values();
  if (a.empty()) throw InvariantViolation("time change is empty");
  if (a.front() != 0.0) {
    throw InvariantViolation("time change must satisfy A_0 = 0");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i])) {
      throw InvariantViolation("time change not finite at index " + std::to_string(i));
    }
    if (i > 0 && a[i] < a[i - 1]) {
      throw InvariantViolation("time change decreases at t=" +
                               std::to_string(clock_.times()[i]));
    }
  }
}

TimeChange TimeChange::identity(const Partition& grid) {
  return TimeChange(SamplePath(std::vector<double>(grid.times().begin(), grid.times().end()),
                               std::vector<double>(grid.times().begin(), grid.times().end())));
}

TimeChange TimeChange::power(const Partition& grid, double p) {
  if (!(p > 0.0) || !std::isfinite(p)) {
    throw ParameterDomainError("time change exponent must be positive");
  }
  std::vector<double> a(grid.size());
  std::ranges::transform(grid.times(), a.begin(),
                         [p](double t) { return std::pow(t, p); });
  return TimeChange(grid.constant(0.0).with_values(std::move(a)));
}

TimeChange integrated_cir_time_change(const Partition& grid,
                                      const CirClockParams& params,
                                      std::uint64_t seed) {
  if (!(params.v0 >= 0.0) || !(params.kappa >= 0.0) || !(params.theta >= 0.0) ||
      !(params.xi >= 0.0)) {
    throw ParameterDomainError("CIR clock parameters must be nonnegative");
  }
  const auto t = grid.times();
  const std::vector<double> dw = standard_normals(seed, grid.num_steps());
  std::vector<double> a(grid.size());
  double v = params.v0;
  a[0] = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double dt = t[i + 1] - t[i];
    const double vp = std::max(v, 0.0);
    a[i + 1] = a[i] + vp * dt;
    v += params.kappa * (params.theta - vp) * dt + params.xi * std::sqrt(vp * dt) * dw[i];
  }
  return TimeChange(grid.constant(0.0).with_values(std::move(a)));
}

TimeChangedFbmSampler::TimeChangedFbmSampler(TimeChange clock, double hurst)
    : clock_(std::move(clock)) {
  require_hurst_in_unit_interval(hurst);
  const auto a = clock_.clock().values();
  knot_of_.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    // A is nondecreasing, so ties are always adjacent.
    if (knots_.empty() || a[i] != knots_.back()) knots_.push_back(a[i]);
    knot_of_[i] = knots_.size() - 1;
  }
  sampler_ = std::make_shared<const GridFbmSampler>(knots_, hurst);
}

SamplePath TimeChangedFbmSampler::sample(std::uint64_t seed) const {
  const std::vector<double> b = sampler_->sample_values(seed);
  std::vector<double> z(knot_of_.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = b[knot_of_[i]];
  return clock_.clock().with_values(std::move(z));
}

const FactorizationReport& TimeChangedFbmSampler::report() const {
  return sampler_->report();
}

SamplePath time_change_compose(const TimeChange& clock, double hurst,
                               std::uint64_t seed) {
  return TimeChangedFbmSampler(clock, hurst).sample(seed);
}

}  // namespace fbmarb

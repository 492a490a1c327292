#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fbmarb/sample_path.hpp"

namespace fbmarb {

struct FbmSpec {
  double hurst = 0.5;
  double horizon = 1.0;
  std::size_t num_steps = 1;  // grid has num_steps + 1 points
  std::uint64_t seed = 0;

  /// Throws ParameterDomainError for hurst outside (0,1), a non-positive
  /// horizon or zero steps.
  void validate() const;
};

void require_hurst_in_unit_interval(double hurst);

/// Unit-spacing autocovariance of fractional Gaussian noise,
/// gamma(k) = (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2.
double fgn_autocovariance(std::size_t lag, double hurst);

/// Which exact route produced a uniform-grid path.
enum class FbmMethod { kCirculantEmbedding, kCholesky };

/// Diagonal jitter applied while factorizing a covariance matrix.
struct FactorizationReport {
  int jitter_retries = 0;
  double jitter = 0.0;  // relative to the mean diagonal entry
};

/// Exact fBm sampler on an arbitrary set of nonnegative, strictly increasing
/// times.  Factorizes the covariance of the increments between consecutive
/// times (a linear image of the full fBm covariance) once; each sample costs
/// one triangular matrix-vector product.
///
/// On a failed Cholesky the factorization is retried with diagonal jitter
/// 1e-12, 2e-12, 4e-12 (relative to the mean variance); afterwards a
/// FactorizationError is thrown.  The report records what was applied.
class GridFbmSampler {
 public:
  GridFbmSampler(std::vector<double> times, double hurst);

  /// B^H at the construction times.  Deterministic in seed.
  std::vector<double> sample_values(std::uint64_t seed) const;
  /// Same, from caller-supplied standard normals (size() of them, or
  /// size() - 1 when the first time is 0).
  std::vector<double> sample_values(std::span<const double> normals) const;

  std::span<const double> times() const noexcept { return times_; }
  double hurst() const noexcept { return hurst_; }
  const FactorizationReport& report() const noexcept { return report_; }

 private:
  std::vector<double> times_;
  double hurst_;
  bool starts_at_zero_;
  std::shared_ptr<const Eigen::MatrixXd> lower_;
  FactorizationReport report_;
};

/// Circulant-embedding (Davies-Harte) sampler for a uniform grid.
/// Precomputes the embedding spectrum; sample() is const and thread-safe.
class CirculantFbmSampler {
 public:
  /// Throws InternalConsistencyError if the embedding has a genuinely
  /// negative eigenvalue; callers should then fall back to GridFbmSampler.
  CirculantFbmSampler(double hurst, double horizon, std::size_t num_steps);
  ~CirculantFbmSampler();
  CirculantFbmSampler(const CirculantFbmSampler&);
  CirculantFbmSampler& operator=(const CirculantFbmSampler&) = delete;

  /// Unit-variance fGn increments (num_steps of them).
  std::vector<double> sample_fgn(std::uint64_t seed) const;
  SamplePath sample(std::uint64_t seed) const;

  std::size_t num_steps() const noexcept { return num_steps_; }

 private:
  struct Plan;
  double hurst_;
  double horizon_;
  std::size_t num_steps_;
  std::vector<double> sqrt_eigen_;  // sqrt(lambda_k / m), m = 2 n
  std::shared_ptr<Plan> plan_;
  Partition grid_;
};

/// Uniform-grid fBm sampler.  Uses circulant embedding, except for grids of
/// at most kSmallGrid steps (or a failed embedding on grids of at most
/// kMaxCholeskySteps) where the covariance factorization route is used.
class UniformFbmSampler {
 public:
  static constexpr std::size_t kSmallGrid = 16;
  static constexpr std::size_t kMaxCholeskySteps = 4096;

  UniformFbmSampler(double hurst, double horizon, std::size_t num_steps);
  explicit UniformFbmSampler(const FbmSpec& spec)
      : UniformFbmSampler(spec.hurst, spec.horizon, spec.num_steps) {}

  SamplePath sample(std::uint64_t seed) const;
  FbmMethod method() const noexcept { return method_; }
  const Partition& grid() const noexcept { return grid_; }

 private:
  Partition grid_;
  FbmMethod method_;
  std::shared_ptr<const CirculantFbmSampler> circulant_;
  std::shared_ptr<const GridFbmSampler> cholesky_;
};

SamplePath generate_fbm(const FbmSpec& spec);

/// Exact sample at `times` (strictly increasing, times[0] == 0).
SamplePath generate_fbm_on_grid(std::span<const double> times, double hurst,
                                std::uint64_t seed);

/// Continuous nondecreasing clock A sampled on a grid, with A_0 = 0.
class TimeChange {
 public:
  /// Throws InvariantViolation for a decreasing, non-finite or
  /// nonzero-at-origin clock.
  explicit TimeChange(SamplePath clock);

  static TimeChange identity(const Partition& grid);
  /// A_t = t^p, p > 0.
  static TimeChange power(const Partition& grid, double p);

  const SamplePath& clock() const noexcept { return clock_; }

 private:
  SamplePath clock_;
};

struct CirClockParams {
  double v0 = 1.0;
  double kappa = 1.0;
  double theta = 1.0;
  double xi = 0.3;
};

/// A_t = int_0^t v_s ds with v a full-truncation Euler CIR process; the
/// integral is the left-point sum of max(v, 0), hence nondecreasing.
TimeChange integrated_cir_time_change(const Partition& grid,
                                      const CirClockParams& params,
                                      std::uint64_t seed);

/// Z_t = B^H_{A_t}.  The fBm is sampled once at the distinct clock values,
/// so tied clock values give exactly tied Z values.
class TimeChangedFbmSampler {
 public:
  TimeChangedFbmSampler(TimeChange clock, double hurst);

  SamplePath sample(std::uint64_t seed) const;
  const FactorizationReport& report() const;
  std::size_t num_distinct_times() const noexcept { return knots_.size(); }

 private:
  TimeChange clock_;
  std::vector<double> knots_;          // distinct clock values, knots_[0] == 0
  std::vector<std::size_t> knot_of_;   // grid index -> knot index
  std::shared_ptr<const GridFbmSampler> sampler_;
};

SamplePath time_change_compose(const TimeChange& clock, double hurst,
                               std::uint64_t seed);

}  // namespace fbmarb

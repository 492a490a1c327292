#include "fbmarb/sample_path.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fbmarb/errors.hpp"

namespace fbmarb {

namespace {

void check_times(const std::vector<double>& times) {
  if (times.empty()) throw InvariantViolation("time grid is empty");
  if (times.front() != 0.0) {
    throw InvariantViolation("time grid must start at 0, got " +
                             std::to_string(times.front()));
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw InvariantViolation("time grid not strictly increasing at index " +
                               std::to_string(i));
    }
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& p : problems) msg += "\n  - " + p;
        return msg;
      }()),
      problems_(std::move(problems)) {}

SamplePath::SamplePath(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.size() != values_.size()) {
    throw InvariantViolation("times and values differ in length (" +
                             std::to_string(times_.size()) + " vs " +
                             std::to_string(values_.size()) + ")");
  }
  check_times(times_);
}

SamplePath SamplePath::subsample(std::size_t stride) const {
  if (stride == 0 || (size() - 1) % stride != 0) {
    throw InvariantViolation("stride " + std::to_string(stride) +
                             " does not divide " + std::to_string(size() - 1) +
                             " intervals");
  }
  const std::size_t n = (size() - 1) / stride + 1;
  std::vector<double> t(n), v(n);
  for (std::size_t j = 0; j < n; ++j) {
    t[j] = times_[j * stride];
    v[j] = values_[j * stride];
  }
  SamplePath out;
  out.times_ = std::move(t);
  out.values_ = std::move(v);
  return out;
}

SamplePath SamplePath::with_values(std::vector<double> values) const {
  if (values.size() != values_.size()) {
    throw InvariantViolation("replacement values have the wrong length");
  }
  SamplePath out;
  out.times_ = times_;
  out.values_ = std::move(values);
  return out;
}

bool same_grid(const SamplePath& a, const SamplePath& b) noexcept {
  return std::ranges::equal(a.times(), b.times());
}

void require_same_grid(const SamplePath& a, const SamplePath& b,
                       const char* context) {
  if (!same_grid(a, b)) {
    throw GridMismatchError(std::string(context) +
                            ": paths are not on the same time grid");
  }
}

Partition::Partition(std::vector<double> times) : times_(std::move(times)) {
  check_times(times_);
  if (times_.size() < 2) throw InvariantViolation("partition needs 2+ points");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    mesh_ = std::max(mesh_, times_[i] - times_[i - 1]);
  }
}

Partition Partition::uniform(double horizon, std::size_t num_steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ParameterDomainError("horizon must be positive and finite");
  }
  if (num_steps == 0) throw ParameterDomainError("num_steps must be >= 1");
  std::vector<double> t(num_steps + 1);
  const auto n = static_cast<double>(num_steps);
  // i/n is exact for dyadic n, so subsampled fine grids equal coarse grids.
  for (std::size_t i = 0; i <= num_steps; ++i) {
    t[i] = horizon * (static_cast<double>(i) / n);
  }
  t.back() = horizon;
  return Partition(std::move(t));
}

Partition Partition::dyadic(double horizon, int level) {
  if (level < 0 || level > 30) {
    throw ParameterDomainError("dyadic level must lie in [0, 30]");
  }
  return uniform(horizon, std::size_t{1} << level);
}

bool Partition::is_refined_by(const Partition& finer) const {
  return std::ranges::includes(finer.times_, times_);
}

SamplePath Partition::constant(double value) const {
  return SamplePath(times_, std::vector<double>(times_.size(), value));
}

Partition partition_of(const SamplePath& path) {
  return Partition(std::vector<double>(path.times().begin(), path.times().end()));
}

}  // namespace fbmarb

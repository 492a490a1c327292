#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fbmarb {

/// Strictly increasing time grid starting at 0 paired with real values.
/// Every process in the library (modulator, volatility, prices, running
/// integrals) is carried as a SamplePath.
class SamplePath {
 public:
  SamplePath() = default;
  /// Throws InvariantViolation unless times[0] == 0, times strictly
  /// increasing and both vectors have the same length.
  SamplePath(std::vector<double> times, std::vector<double> values);

  std::span<const double> times() const noexcept { return times_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }
  double horizon() const { return times_.back(); }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Every `stride`-th point, always including the last one.  The size
  /// minus one must be divisible by stride.
  SamplePath subsample(std::size_t stride) const;

  /// Same times, new values.
  SamplePath with_values(std::vector<double> values) const;

  friend bool operator==(const SamplePath&, const SamplePath&) = default;

 private:
  std::vector<double> times_;
  std::vector<double> values_;
};

/// Bitwise-equal time grids.
bool same_grid(const SamplePath& a, const SamplePath& b) noexcept;

/// Throws GridMismatchError naming `context` when the grids differ.
void require_same_grid(const SamplePath& a, const SamplePath& b,
                       const char* context);

/// Strictly increasing partition of [0, T] with times[0] == 0.
class Partition {
 public:
  explicit Partition(std::vector<double> times);

  /// Uniform grid with 2^level intervals on [0, horizon].
  static Partition dyadic(double horizon, int level);
  /// Uniform grid with num_steps intervals on [0, horizon].
  static Partition uniform(double horizon, std::size_t num_steps);

  std::span<const double> times() const noexcept { return times_; }
  std::size_t size() const noexcept { return times_.size(); }
  std::size_t num_steps() const noexcept { return times_.size() - 1; }
  double horizon() const { return times_.back(); }
  double mesh() const noexcept { return mesh_; }

  /// True when every point of *this is also a point of `finer`.
  bool is_refined_by(const Partition& finer) const;

  SamplePath constant(double value) const;

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.times_ == b.times_;
  }

 private:
  std::vector<double> times_;
  double mesh_ = 0.0;
};

Partition partition_of(const SamplePath& path);

}  // namespace fbmarb

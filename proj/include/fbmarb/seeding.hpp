#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fbmarb {

/// Independent random substreams used by one simulated scenario.
enum class Stream : std::uint64_t {
  kModulator = 1,
  kVolatilityDriver = 2,
  kTimeChangeClock = 3,
  kAuxiliaryBrownian = 4,
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based seed derivation: the seed for (master, stream, index) is
/// a hash of the triple, so ensemble members can be generated in any order
/// or in parallel and always receive the same randomness.
std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                          std::uint64_t index) noexcept;

using Engine = std::mt19937_64;

/// n iid standard normals from a fresh engine seeded with `seed`.
std::vector<double> standard_normals(std::uint64_t seed, std::size_t n);

}  // namespace fbmarb

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace scatterid {

using Rng = std::mt19937_64;

/// Purpose keys for derived random streams. Each consumer of randomness
/// draws from its own stream keyed by (master seed, purpose, indices), so
/// results never depend on the order in which slots, trees or folds run.
enum class StreamPurpose : std::uint64_t {
  kTrajectory = 1,
  kSchedule = 2,
  kTrace = 3,
  kTree = 4,
  kFolds = 5,
  kRun = 6,
  kStart = 7,
  kMultipath = 8,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Mixes the master seed with the purpose and indices into a 64-bit seed.
std::uint64_t derive_seed(std::uint64_t master, StreamPurpose purpose,
                          std::initializer_list<std::uint64_t> indices = {});

Rng make_stream(std::uint64_t master, StreamPurpose purpose,
                std::initializer_list<std::uint64_t> indices = {});

}  // namespace scatterid

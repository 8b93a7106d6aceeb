#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

#include "redge/types.hpp"

namespace redge {

using Rng = std::mt19937_64;

// Purpose tags mixed into derived stream seeds so that independent
// consumers of one master seed never share a random sequence.
enum class StreamTag : std::uint64_t {
  kModelInit = 1,
  kNormalization = 2,
  kTrainRealization = 3,
  kTrainBatch = 4,
  kValidation = 5,
  kTest = 6,
  kOracle = 7,
};

// Deterministic child stream for (seed, tag, indices...).
Rng make_stream(std::uint64_t seed, StreamTag tag,
                std::initializer_list<std::uint64_t> indices = {});

// Same derivation as make_stream, returned as a 64-bit seed value.
std::uint64_t derive_seed(std::uint64_t seed, StreamTag tag,
                          std::initializer_list<std::uint64_t> indices = {});

using StandardNormal = std::normal_distribution<double>;

// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline Complex complex_normal(Rng& rng, StandardNormal& normal, double variance) {
  const double s = std::sqrt(0.5 * variance);
  const double re = normal(rng);
  const double im = normal(rng);
  return {s * re, s * im};
}

}  // namespace redge

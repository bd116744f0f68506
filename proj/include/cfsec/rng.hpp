#pragma once

#include <cstdint>
#include <complex>
#include <random>

namespace cfsec {

/// Independent purposes that get their own random sub-stream.
enum class StreamPurpose : std::uint64_t {
  kGeometry = 1,
  kShadowing = 2,
  kSmallScale = 3,
  kNoise = 4,
  kDetection = 5,
  kOracle = 6,
  kScenarioMeta = 7,
};

using Engine = std::mt19937_64;

/// Derives a deterministic engine from the root seed, a purpose tag and up to
/// two indices (drop, trial block). Different tuples give statistically
/// independent streams; identical tuples give bit-identical streams.
Engine derive_stream(std::uint64_t root_seed, StreamPurpose purpose,
                     std::uint64_t index_a = 0, std::uint64_t index_b = 0);

/// Standard circularly-symmetric complex Gaussian sampler, CN(0, 1).
class ComplexNormal {
 public:
  template <class Gen>
  std::complex<double> operator()(Gen& gen) {
    return {normal_(gen), normal_(gen)};
  }

 private:
  std::normal_distribution<double> normal_{0.0, 0.70710678118654752440};
};

}  // namespace cfsec

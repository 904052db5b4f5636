// Deterministic random number utilities.
//
// All stochastic code in the library draws from a std::mt19937_64 through the
// helpers below, in a documented order, so that a given seed reproduces the
// same trajectory on any build of the same binary.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace wsntpc {

using Rng = std::mt19937_64;

// Uniform draw in [0, 1) using the top 53 bits of one engine output.
// (Avoids std::uniform_real_distribution, whose output sequence is not
// specified by the standard and differs between library implementations.)
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// One standard normal deviate via Box-Muller; consumes exactly two engine
// outputs per call.  The sine branch is discarded on purpose: a stateless
// generator keeps the draw order trivial to document.
inline double sample_standard_normal(Rng& rng) {
  const double u1 = 1.0 - uniform_unit(rng);  // (0, 1], keeps log finite
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

// splitmix64-style mixer used to derive independent per-stream seeds
// (e.g. one per Monte Carlo episode) from a master seed.  Streams are
// decorrelated even for adjacent indices or adjacent master seeds.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace wsntpc

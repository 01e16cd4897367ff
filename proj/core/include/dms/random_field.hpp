#pragma once

#include <cstdint>
#include <random>

#include "dms/lattice.hpp"

namespace dms {

using Rng = std::mt19937_64;

struct RandomFieldOptions {
  /// Envelope e^{-rate |x - center|}; 0 disables it.
  double envelope_rate = 0.15;
  /// Probability that a site is switched off.
  double dropout = 0.2;
  /// Support restricted to [lo, hi] when set (sites outside stay zero).
  bool restrict_support = false;
  long lo = 0;
  long hi = 0;
  long center = 0;
};

/// Complex Gaussian amplitudes under an exponential envelope with a random
/// support mask. Never returns the zero field.
LatticeField random_field(Rng& rng, int radius, const RandomFieldOptions& opt = {});

/// Seed for trial i derived from a master seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace dms

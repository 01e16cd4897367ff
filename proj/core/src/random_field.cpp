#include "dms/random_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dms {

LatticeField random_field(Rng& rng, int radius, const RandomFieldOptions& opt) {
  long lo = -radius, hi = radius;
  if (opt.restrict_support) {
    lo = std::max<long>(lo, opt.lo);
    hi = std::min<long>(hi, opt.hi);
    if (lo > hi) throw std::invalid_argument("random_field: empty support");
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LatticeField f(radius);
  bool any = false;
  for (long x = lo; x <= hi; ++x) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    const bool keep = unit(rng) >= opt.dropout;
    if (!keep) continue;
    const double env = std::exp(-opt.envelope_rate * std::abs(x - opt.center));
    f.at(x) = env * Complex{re, im};
    any = true;
  }
  if (!any) f.at(std::clamp<long>(opt.center, lo, hi)) = Complex{gauss(rng), gauss(rng)};
  return f;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace dms

#include "dms/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dms/diagnostics.hpp"
#include "dms/summation.hpp"

namespace dms {

LatticeField::LatticeField(int radius)
    : radius_(radius),
      values_(static_cast<std::size_t>(2 * radius + 1)) {
  if (radius < 0) throw std::invalid_argument("negative box radius");
}

LatticeField::LatticeField(int radius, std::vector<Complex> values)
    : radius_(radius), values_(std::move(values)) {
  if (radius < 0) throw std::invalid_argument("negative box radius");
  if (values_.size() != static_cast<std::size_t>(2 * radius + 1)) {
    throw std::invalid_argument("value count does not match box radius " +
                                std::to_string(radius));
  }
}

Complex& LatticeField::at(long site) {
  if (!contains(site)) {
    throw std::out_of_range("site " + std::to_string(site) +
                            " outside box of radius " +
                            std::to_string(radius_));
  }
  return values_[static_cast<std::size_t>(site + radius_)];
}

LatticeField LatticeField::resized(int new_radius) const {
  LatticeField out(new_radius);
  const int keep = std::min(radius_, new_radius);
  for (int x = -keep; x <= keep; ++x) out.at(x) = (*this)[x];
  return out;
}

double LatticeField::mass_outside(int keep) const {
  CompensatedSum s;
  for (int x = -radius_; x <= radius_; ++x) {
    if (x < -keep || x > keep) s += std::norm((*this)[x]);
  }
  return s.value();
}

bool LatticeField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](Complex z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

LatticeField& LatticeField::operator+=(const LatticeField& other) {
  if (other.radius_ > radius_) *this = resized(other.radius_);
  for (int x = -other.radius_; x <= other.radius_; ++x) at(x) += other[x];
  return *this;
}

LatticeField& LatticeField::operator-=(const LatticeField& other) {
  if (other.radius_ > radius_) *this = resized(other.radius_);
  for (int x = -other.radius_; x <= other.radius_; ++x) at(x) -= other[x];
  return *this;
}

LatticeField& LatticeField::operator*=(Complex s) {
  for (auto& v : values_) v *= s;
  return *this;
}

LatticeField operator+(LatticeField a, const LatticeField& b) { return a += b; }
LatticeField operator-(LatticeField a, const LatticeField& b) { return a -= b; }
LatticeField operator*(Complex s, LatticeField f) { return f *= s; }

void BoxPolicy::validate() const {
  if (box_radius < 1) throw std::invalid_argument("box_radius must be >= 1");
  if (!(tail_floor > 0.0)) throw std::invalid_argument("tail_floor must be > 0");
}

LatticeField laplacian(const LatticeField& f) {
  const int m = f.radius() + 1;
  LatticeField out(m);
  for (int x = -m; x <= m; ++x) out.at(x) = f[x + 1] - 2.0 * f[x] + f[x - 1];
  return out;
}

LatticeField forward_diff(const LatticeField& f) {
  const int m = f.radius() + 1;
  LatticeField out(m);
  for (int x = -m; x <= m; ++x) out.at(x) = f[x + 1] - f[x];
  return out;
}

LatticeField backward_diff(const LatticeField& f) {
  const int m = f.radius() + 1;
  LatticeField out(m);
  for (int x = -m; x <= m; ++x) out.at(x) = f[x] - f[x - 1];
  return out;
}

void dirichlet_laplacian(std::span<const Complex> in, std::span<Complex> out) {
  const std::size_t n = in.size();
  if (n == 0) return;
  if (n == 1) {
    out[0] = -2.0 * in[0];
    return;
  }
  out[0] = in[1] - 2.0 * in[0];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out[i] = in[i + 1] - 2.0 * in[i] + in[i - 1];
  }
  out[n - 1] = in[n - 2] - 2.0 * in[n - 1];
}

LatticeField shifted(const LatticeField& f, long k) {
  LatticeField out(f.radius());
  for (long x = -f.radius(); x <= f.radius(); ++x) out.at(x) = f[x - k];
  return out;
}

LatticeField pointwise_product(const LatticeField& a, const LatticeField& b) {
  const int m = std::min(a.radius(), b.radius());
  LatticeField out(m);
  for (int x = -m; x <= m; ++x) out.at(x) = a[x] * b[x];
  return out;
}

Complex inner(const LatticeField& f, const LatticeField& g) {
  const int m = std::min(f.radius(), g.radius());
  CompensatedComplexSum s;
  for (int x = -m; x <= m; ++x) s += std::conj(f[x]) * g[x];
  return s.value();
}

double power_sum(const LatticeField& f, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("power_sum needs finite p >= 1");
  }
  CompensatedSum s;
  if (p == 2.0) {
    for (Complex z : f.values()) s += std::norm(z);
  } else {
    for (Complex z : f.values()) s += std::pow(std::abs(z), p);
  }
  return s.value();
}

double sup_norm(const LatticeField& f) {
  double m = 0.0;
  for (Complex z : f.values()) m = std::max(m, std::abs(z));
  return m;
}

double lp_norm(const LatticeField& f, double p) {
  if (std::isnan(p) || p < 1.0) {
    throw std::invalid_argument("lp_norm needs 1 <= p <= inf");
  }
  if (std::isinf(p)) return sup_norm(f);
  return std::pow(power_sum(f, p), 1.0 / p);
}

double l2_norm(const LatticeField& f) { return std::sqrt(power_sum(f, 2.0)); }

double dirichlet_energy(const LatticeField& f) {
  CompensatedSum s;
  for (long x = -f.radius() - 1; x <= f.radius(); ++x) {
    s += std::norm(f[x + 1] - f[x]);
  }
  return s.value();
}

LatticeField exp_profile(double amplitude, double rate, int radius) {
  if (!(amplitude > 0.0) || !(rate > 0.0)) {
    throw std::invalid_argument("exp_profile needs A > 0 and nu > 0");
  }
  const double edge = amplitude * std::exp(-rate * (radius + 1));
  if (edge >= 1e-13) {
    warn("exp_profile: box radius " + std::to_string(radius) +
         " truncates amplitude " + std::to_string(edge));
  }
  LatticeField f(radius);
  for (int x = -radius; x <= radius; ++x) {
    f.at(x) = amplitude * std::exp(-rate * std::abs(x));
  }
  return f;
}

double ExpProfileNorms::power_sum(double amplitude, double rate, double kappa) {
  const double h = 0.5 * kappa * rate;
  return std::pow(amplitude, kappa) * std::cosh(h) / std::sinh(h);
}

double ExpProfileNorms::dirichlet_energy(double amplitude, double rate) {
  const double s = std::sinh(0.5 * rate);
  return 4.0 * amplitude * amplitude * s * s / std::sinh(rate);
}

double ExpProfileNorms::tail_mass(double amplitude, double rate, int n) {
  // Σ_{|x|≥n} A² e^{-2ν|x|}
  const double q = std::exp(-2.0 * rate);
  const double a2 = amplitude * amplitude;
  if (n == 0) return a2 * (1.0 + q) / (1.0 - q);
  return 2.0 * a2 * std::pow(q, n) / (1.0 - q);
}

LatticeField delta(int radius, long site, Complex c) {
  LatticeField f(radius);
  f.at(site) = c;
  return f;
}

long peak_site(const LatticeField& f) {
  long best = -f.radius();
  double best_abs = -1.0;
  for (long x = -f.radius(); x <= f.radius(); ++x) {
    const double a = std::abs(f[x]);
    if (a > best_abs) {
      best_abs = a;
      best = x;
    }
  }
  return best;
}

}  // namespace dms

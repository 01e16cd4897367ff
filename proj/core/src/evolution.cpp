#include "dms/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include <fftw3.h>

#include "dms/diagnostics.hpp"

namespace dms {

void EvolutionMethod::validate() const {
  if (!(series_tolerance > 0.0)) {
    throw std::invalid_argument("series_tolerance must be > 0");
  }
  if (!(leak_tolerance > 0.0)) {
    throw std::invalid_argument("leak_tolerance must be > 0");
  }
  if (margin && *margin < 0) throw std::invalid_argument("margin must be >= 0");
}

const char* to_string(EvolutionVariant v) {
  switch (v) {
    case EvolutionVariant::taylor_scaled: return "taylor_scaled";
    case EvolutionVariant::closed_kernel: return "closed_kernel";
    case EvolutionVariant::spectral_ring: return "spectral_ring";
  }
  return "?";
}

EvolutionVariant parse_evolution_variant(std::string_view name) {
  if (name == "taylor_scaled") return EvolutionVariant::taylor_scaled;
  if (name == "closed_kernel") return EvolutionVariant::closed_kernel;
  if (name == "spectral_ring") return EvolutionVariant::spectral_ring;
  throw std::invalid_argument("unknown evolution method '" + std::string(name) +
                              "'");
}

double kernel_bound(double r, long n) {
  const double a = 4.0 * std::abs(r);
  n = std::abs(n);
  if (n == 0) return 1.0;
  if (a == 0.0) return 0.0;
  const double log_b = a + static_cast<double>(n) * std::log(a) -
                       std::lgamma(static_cast<double>(n) + 1.0);
  return std::min(1.0, std::exp(log_b));
}

int required_margin(double r, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("required_margin needs tol > 0");
  const double a = 4.0 * std::abs(r);
  if (a == 0.0) return tol > 1.0 ? 0 : 1;
  for (int m = 0; m < 100000; ++m) {
    const double log_b = a + m * std::log(a) - std::lgamma(m + 1.0);
    if (log_b < std::log(tol)) return m;
  }
  throw NumericError("required_margin: no margin found");
}

namespace {

// Σ_k (-1)^k r^{2k+n} / (k! (n+k)!) = J_n(2r), summed in long double.
long double bessel_series(long double r, long n, double tol) {
  long double term = 1.0L;
  for (long j = 1; j <= n; ++j) term *= r / static_cast<long double>(j);
  long double sum = term;
  const long double r2 = r * r;
  for (long k = 0; k < 20000; ++k) {
    term *= -r2 / (static_cast<long double>(k + 1) * static_cast<long double>(n + k + 1));
    sum += term;
    if (k > 2.0L * std::fabs(r) &&
        std::fabs(term) <= tol * std::max(std::fabs(sum), 1e-300L)) {
      return sum;
    }
    if (term == 0.0L) return sum;
  }
  throw NumericError("kernel_entry: series did not converge");
}

Complex phase_factor(double r, long n) {
  // e^{-2ir} i^{|n|}
  static constexpr Complex powers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return std::polar(1.0, -2.0 * r) * powers[std::abs(n) % 4];
}

Complex kernel_series_small(double r, long n, double tol) {
  n = std::abs(n);
  const long double j = bessel_series(static_cast<long double>(r), n, tol);
  return phase_factor(r, n) * static_cast<double>(j);
}

}  // namespace

Complex kernel_entry(double r, long n, double series_tolerance) {
  if (!(std::abs(r) <= 16.0)) {
    throw std::invalid_argument("kernel_entry: |r| <= 16 required");
  }
  n = std::abs(n);
  if (std::abs(r) <= 2.0) return kernel_series_small(r, n, series_tolerance);

  // Kernel of T_r is the s-fold convolution square of the kernel of T_{r/2^s}.
  int s = 0;
  double h = r;
  while (std::abs(h) > 2.0) {
    h *= 0.5;
    ++s;
  }
  const long width = n + required_margin(r, 1e-30) + 2;
  std::vector<Complex> k(static_cast<std::size_t>(2 * width + 1));
  for (long d = -width; d <= width; ++d) {
    k[static_cast<std::size_t>(d + width)] = kernel_series_small(h, d, series_tolerance);
  }
  std::vector<Complex> next(k.size());
  for (int step = 0; step < s; ++step) {
    for (long d = -width; d <= width; ++d) {
      Complex acc{};
      const long lo = std::max(-width, d - width);
      const long hi = std::min(width, d + width);
      for (long e = lo; e <= hi; ++e) {
        acc += k[static_cast<std::size_t>(e + width)] *
               k[static_cast<std::size_t>(d - e + width)];
      }
      next[static_cast<std::size_t>(d + width)] = acc;
    }
    std::swap(k, next);
  }
  return k[static_cast<std::size_t>(n + width)];
}

Complex kernel_entry_bessel(double r, long n) {
  n = std::abs(n);
  const double x = 2.0 * std::abs(r);
  double j = x == 0.0 ? (n == 0 ? 1.0 : 0.0)
                      : std::cyl_bessel_j(static_cast<double>(n), x);
  if (r < 0.0 && (n % 2 == 1)) j = -j;
  return phase_factor(r, n) * j;
}

void taylor_evolve_in_place(double r, std::span<Complex> v,
                            double series_tolerance) {
  if (r == 0.0 || v.empty()) return;
  // ‖hΔ_D‖ ≤ 4|h| ≤ 2 per substep.
  const int substeps = std::max(1, static_cast<int>(std::ceil(2.0 * std::abs(r))));
  const double h = r / substeps;
  const double a = 4.0 * std::abs(h);
  int terms = 1;
  for (double bound = a; bound >= series_tolerance; bound *= a / (terms + 1)) {
    ++terms;
    if (terms > 400) throw NumericError("taylor_evolve: series cap reached");
  }
  const Complex ih{0.0, h};
  std::vector<Complex> term(v.size()), lap(v.size());
  for (int s = 0; s < substeps; ++s) {
    std::copy(v.begin(), v.end(), term.begin());
    for (int k = 1; k <= terms; ++k) {
      dirichlet_laplacian(term, lap);
      const Complex c = ih / static_cast<double>(k);
      for (std::size_t i = 0; i < v.size(); ++i) {
        term[i] = c * lap[i];
        v[i] += term[i];
      }
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

// Plans are created once per (size, direction) and kept for the process.
fftw_plan ring_plan(int n, int sign) {
  static std::map<std::pair<int, int>, fftw_plan> cache;
  std::lock_guard lock(fftw_mutex());
  auto it = cache.find({n, sign});
  if (it != cache.end()) return it->second;
  std::vector<Complex> a(static_cast<std::size_t>(n)), b(a.size());
  fftw_plan p = fftw_plan_dft_1d(
      n, reinterpret_cast<fftw_complex*>(a.data()),
      reinterpret_cast<fftw_complex*>(b.data()), sign,
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(std::make_pair(n, sign), p);
  return p;
}

int smooth_size_at_least(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int k = m;
    for (int p : {2, 3, 5}) {
      while (k % p == 0) k /= p;
    }
    if (k == 1) return m;
  }
}

std::size_t idx(long site, int radius) {
  return static_cast<std::size_t>(site + radius);
}

}  // namespace

struct Propagator::Impl {
  virtual ~Impl() = default;
  virtual void apply(std::span<const Complex> in, std::span<Complex> out) const = 0;
  virtual void adjoint(std::span<const Complex> in, std::span<Complex> out) const = 0;
};

namespace {

struct IdentityImpl final : Propagator::Impl {
  int in_radius, out_radius;
  IdentityImpl(int m, int w) : in_radius(m), out_radius(w) {}
  void apply(std::span<const Complex> in, std::span<Complex> out) const override {
    std::fill(out.begin(), out.end(), Complex{});
    const int keep = std::min(in_radius, out_radius);
    for (long x = -keep; x <= keep; ++x) out[idx(x, out_radius)] = in[idx(x, in_radius)];
  }
  void adjoint(std::span<const Complex> in, std::span<Complex> out) const override {
    std::fill(out.begin(), out.end(), Complex{});
    const int keep = std::min(in_radius, out_radius);
    for (long x = -keep; x <= keep; ++x) out[idx(x, in_radius)] = in[idx(x, out_radius)];
  }
};

struct TaylorImpl final : Propagator::Impl {
  double r, tol;
  int in_radius, out_radius;
  TaylorImpl(double r_, int m, int w, double t)
      : r(r_), tol(t), in_radius(m), out_radius(w) {}
  void apply(std::span<const Complex> in, std::span<Complex> out) const override {
    std::fill(out.begin(), out.end(), Complex{});
    for (long x = -in_radius; x <= in_radius; ++x) {
      out[idx(x, out_radius)] = in[idx(x, in_radius)];
    }
    taylor_evolve_in_place(r, out, tol);
  }
  void adjoint(std::span<const Complex> in, std::span<Complex> out) const override {
    std::vector<Complex> buf(in.begin(), in.end());
    taylor_evolve_in_place(-r, buf, tol);
    for (long x = -in_radius; x <= in_radius; ++x) {
      out[idx(x, in_radius)] = buf[idx(x, out_radius)];
    }
  }
};

struct KernelImpl final : Propagator::Impl {
  int in_radius, out_radius, reach;
  std::vector<Complex> kernel;  // kernel[d + reach] = ⟨x|T_r|x-d⟩
  KernelImpl(double r, int m, int w) : in_radius(m), out_radius(w), reach(m + w) {
    kernel.resize(static_cast<std::size_t>(2 * reach + 1));
    for (long d = 0; d <= reach; ++d) {
      const Complex k = kernel_entry_bessel(r, d);
      kernel[static_cast<std::size_t>(reach + d)] = k;
      kernel[static_cast<std::size_t>(reach - d)] = k;
    }
  }
  void apply(std::span<const Complex> in, std::span<Complex> out) const override {
    for (long x = -out_radius; x <= out_radius; ++x) {
      Complex acc{};
      for (long y = -in_radius; y <= in_radius; ++y) {
        acc += kernel[static_cast<std::size_t>(x - y + reach)] * in[idx(y, in_radius)];
      }
      out[idx(x, out_radius)] = acc;
    }
  }
  void adjoint(std::span<const Complex> in, std::span<Complex> out) const override {
    for (long y = -in_radius; y <= in_radius; ++y) {
      Complex acc{};
      for (long x = -out_radius; x <= out_radius; ++x) {
        acc += std::conj(kernel[static_cast<std::size_t>(x - y + reach)]) *
               in[idx(x, out_radius)];
      }
      out[idx(y, in_radius)] = acc;
    }
  }
};

struct RingImpl final : Propagator::Impl {
  int in_radius, out_radius, ring;
  std::vector<Complex> phase;  // e^{ir(2cos θ_k - 2)} / ring
  fftw_plan fwd, bwd;

  RingImpl(double r, int m, int w, double leak_tol)
      : in_radius(m), out_radius(w) {
    ring = smooth_size_at_least(2 * w + 1);
    if (kernel_bound(r, ring - w - m) >= leak_tol) {
      throw NumericError("spectral_ring: wrap-around above leak tolerance");
    }
    phase.resize(static_cast<std::size_t>(ring));
    for (int k = 0; k < ring; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / ring;
      phase[static_cast<std::size_t>(k)] =
          std::polar(1.0 / ring, r * (2.0 * std::cos(theta) - 2.0));
    }
    fwd = ring_plan(ring, FFTW_FORWARD);
    bwd = ring_plan(ring, FFTW_BACKWARD);
  }

  std::size_t slot(long x) const {
    return static_cast<std::size_t>(((x % ring) + ring) % ring);
  }

  void run(std::span<const Complex> in, int from, std::span<Complex> out, int to,
           bool conj_phase) const {
    std::vector<Complex> a(static_cast<std::size_t>(ring)), b(a.size());
    for (long x = -from; x <= from; ++x) a[slot(x)] = in[idx(x, from)];
    fftw_execute_dft(fwd, reinterpret_cast<fftw_complex*>(a.data()),
                     reinterpret_cast<fftw_complex*>(b.data()));
    for (std::size_t k = 0; k < b.size(); ++k) {
      b[k] *= conj_phase ? std::conj(phase[k]) : phase[k];
    }
    fftw_execute_dft(bwd, reinterpret_cast<fftw_complex*>(b.data()),
                     reinterpret_cast<fftw_complex*>(a.data()));
    for (long x = -to; x <= to; ++x) out[idx(x, to)] = a[slot(x)];
  }

  void apply(std::span<const Complex> in, std::span<Complex> out) const override {
    run(in, in_radius, out, out_radius, false);
  }
  void adjoint(std::span<const Complex> in, std::span<Complex> out) const override {
    run(in, out_radius, out, in_radius, true);
  }
};

}  // namespace

Propagator::Propagator(double r, int in_radius, int out_radius,
                       const EvolutionMethod& method)
    : r_(r), in_radius_(in_radius), out_radius_(out_radius),
      variant_(method.variant) {
  method.validate();
  if (in_radius < 0 || out_radius < in_radius) {
    throw std::invalid_argument("Propagator: need 0 <= in_radius <= out_radius");
  }
  if (r == 0.0) {
    impl_ = std::make_unique<IdentityImpl>(in_radius, out_radius);
    return;
  }
  switch (method.variant) {
    case EvolutionVariant::taylor_scaled:
      impl_ = std::make_unique<TaylorImpl>(r, in_radius, out_radius,
                                           method.series_tolerance);
      break;
    case EvolutionVariant::closed_kernel:
      impl_ = std::make_unique<KernelImpl>(r, in_radius, out_radius);
      break;
    case EvolutionVariant::spectral_ring:
      impl_ = std::make_unique<RingImpl>(r, in_radius, out_radius,
                                         method.leak_tolerance);
      break;
  }
}

Propagator::~Propagator() = default;
Propagator::Propagator(Propagator&&) noexcept = default;
Propagator& Propagator::operator=(Propagator&&) noexcept = default;

void Propagator::apply(std::span<const Complex> in, std::span<Complex> out) const {
  impl_->apply(in, out);
}

void Propagator::adjoint(std::span<const Complex> in, std::span<Complex> out) const {
  impl_->adjoint(in, out);
}

LatticeField Propagator::apply(const LatticeField& f) const {
  if (f.radius() != in_radius_) {
    throw std::invalid_argument("Propagator::apply: radius mismatch");
  }
  LatticeField out(out_radius_);
  impl_->apply(f.values(), out.values());
  return out;
}

LatticeField apply_evolution(double r, const LatticeField& f,
                             const EvolutionMethod& method) {
  method.validate();
  const int margin = method.margin.value_or(required_margin(r, method.leak_tolerance));
  if (kernel_bound(r, margin + 1) >= method.leak_tolerance) {
    throw NumericError("apply_evolution: margin " + std::to_string(margin) +
                       " too small for r = " + std::to_string(r));
  }
  Propagator p(r, f.radius(), f.radius() + margin, method);
  return p.apply(f);
}

}  // namespace dms

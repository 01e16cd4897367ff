#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace dms {

using Complex = std::complex<double>;

/// Complex sequence on the integer box [-M, M]; sites outside the box are
/// zero. Storage is dense, index 0 of the backing vector is site -M.
class LatticeField {
 public:
  LatticeField() = default;
  explicit LatticeField(int radius);
  LatticeField(int radius, std::vector<Complex> values);

  int radius() const { return radius_; }
  std::size_t size() const { return values_.size(); }

  /// Value at a site; zero outside the box.
  Complex operator[](long site) const {
    return contains(site) ? values_[static_cast<std::size_t>(site + radius_)]
                          : Complex{};
  }
  /// Mutable access, site must lie in the box.
  Complex& at(long site);

  bool contains(long site) const { return site >= -radius_ && site <= radius_; }

  std::span<const Complex> values() const { return values_; }
  std::span<Complex> values() { return values_; }

  /// Copy onto a box of a different radius, zero padding or clipping.
  LatticeField resized(int new_radius) const;

  /// Sum of |f(x)|^2 over sites outside [-keep, keep].
  double mass_outside(int keep) const;

  bool all_finite() const;

  LatticeField& operator+=(const LatticeField& other);
  LatticeField& operator-=(const LatticeField& other);
  LatticeField& operator*=(Complex s);

  friend bool operator==(const LatticeField&, const LatticeField&) = default;

 private:
  int radius_ = 0;
  std::vector<Complex> values_ = std::vector<Complex>(1);
};

LatticeField operator+(LatticeField a, const LatticeField& b);
LatticeField operator-(LatticeField a, const LatticeField& b);
LatticeField operator*(Complex s, LatticeField f);

/// Box radius and the amplitude below which truncation is accepted.
struct BoxPolicy {
  int box_radius = 40;
  double tail_floor = 1e-13;

  void validate() const;
};

// Elementary operators. All of them grow the box by their stencil width.

/// (Δf)(x) = f(x+1) - 2 f(x) + f(x-1); output radius M + 1.
LatticeField laplacian(const LatticeField& f);
/// (D₊f)(x) = f(x+1) - f(x); output radius M + 1.
LatticeField forward_diff(const LatticeField& f);
/// (D₋f)(x) = f(x) - f(x-1); output radius M + 1.
LatticeField backward_diff(const LatticeField& f);

/// Δ restricted to the box with zero boundary values; output keeps radius M.
/// This is the self-adjoint truncation used inside propagators and solvers.
void dirichlet_laplacian(std::span<const Complex> in, std::span<Complex> out);

/// Shift by k: (S_k f)(x) = f(x - k). Keeps the radius, mass moved past the
/// edge is dropped.
LatticeField shifted(const LatticeField& f, long k);

/// Pointwise product, radius is the smaller of the two.
LatticeField pointwise_product(const LatticeField& a, const LatticeField& b);

// Norms and inner products, all accumulated with compensated summation.

/// ⟨f, g⟩ = Σ conj(f(x)) g(x).
Complex inner(const LatticeField& f, const LatticeField& g);
/// Σ|f(x)|^p for finite p ≥ 1.
double power_sum(const LatticeField& f, double p);
/// ‖f‖_p for 1 ≤ p ≤ ∞ (pass std::numeric_limits<double>::infinity()).
double lp_norm(const LatticeField& f, double p);
double l2_norm(const LatticeField& f);
double sup_norm(const LatticeField& f);
/// ‖D₊f‖₂² computed directly from neighbour differences.
double dirichlet_energy(const LatticeField& f);

/// A e^{-ν|x|} on [-M, M].
LatticeField exp_profile(double amplitude, double rate, int radius);

/// Closed forms for the exponential profile on the full lattice.
struct ExpProfileNorms {
  static double power_sum(double amplitude, double rate, double kappa);
  static double dirichlet_energy(double amplitude, double rate);
  /// Σ_{|x| ≥ n} |A e^{-ν|x|}|^2.
  static double tail_mass(double amplitude, double rate, int n);
};

/// Kronecker delta c·δ_site on a box of the given radius.
LatticeField delta(int radius, long site = 0, Complex c = 1.0);

/// Index of the site with the largest modulus (first one on ties).
long peak_site(const LatticeField& f);

}  // namespace dms

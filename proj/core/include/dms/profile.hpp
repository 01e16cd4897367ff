#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dms/lattice.hpp"

namespace dms {

struct Atom {
  double node = 0.0;
  double weight = 0.0;
};

/// Finite atomic measure μ = Σ w_j δ_{r_j}.
class DiffractionMeasure {
 public:
  /// Atoms with nodes closer than merge_tol are combined.
  explicit DiffractionMeasure(std::vector<Atom> atoms, double merge_tol = 1e-14);

  /// δ₀, the measure of the undressed lattice equation.
  static DiffractionMeasure dirac();

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double total_mass() const { return total_mass_; }
  /// max |r_j|
  double support_bound() const { return support_bound_; }
  /// Overrides the support bound with a larger value (e.g. sup |D| of the
  /// generating profile).
  void widen_support_bound(double b);

  /// ∫ r^k μ(dr)
  double moment(int k) const;

 private:
  std::vector<Atom> atoms_;
  double total_mass_ = 0.0;
  double support_bound_ = 0.0;
};

struct PowerTerm {
  double coefficient = 1.0;
  double exponent = 4.0;
};

/// V(a) = Σ c_j a^{s_j}, or a user-supplied V / V′ pair, together with the
/// exponents γ₀, γ₁, γ₂ and κ the theory is stated in.
struct NonlinearitySpec {
  std::vector<PowerTerm> terms;
  double gamma0 = 4.0;
  double gamma1 = 4.0;
  double gamma2 = 4.0;
  std::optional<double> kappa;

  /// Extension point. When both are set, terms are ignored for evaluation.
  std::function<double(double)> custom_v;
  std::function<double(double)> custom_dv;

  static NonlinearitySpec kerr();                        // a⁴/4
  static NonlinearitySpec power(double c, double s);     // c a^s
  static NonlinearitySpec from_terms(std::vector<PowerTerm> terms, double gamma0);

  bool is_power_sum() const { return !(custom_v && custom_dv); }
  void validate() const;

  double V(double a) const;
  double dV(double a) const;
  /// p(a) = V′(a)/a, with p(0) = lim.
  double p(double a) const;
  /// P(z) = V′(|z|) z/|z|, P(0) = 0.
  Complex P(Complex z) const;

  /// V(|z+w|) − V(|z|) − V(|w|) without cancellation for power sums.
  double split_defect(Complex z, Complex w) const;
};

struct Segment {
  double length = 1.0;
  double value = 0.0;
};

/// d₀ on one period [0, L), constant on consecutive segments.
struct PiecewiseProfile {
  double period = 1.0;
  std::vector<Segment> segments;
  bool mean_zero = false;

  void validate() const;
  /// D(s) = ∫₀ˢ d₀ for s in [0, L], continued periodically plus drift.
  double D(double s) const;
  /// d₀(s) for s in [0, L) (periodic).
  double d0(double s) const;
  /// Segment boundaries 0 = b₀ < b₁ < ... < b_k = L.
  std::vector<double> breakpoints() const;
  /// ∫ d₀ over one period.
  double mean_integral() const;
};

/// Gauss–Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
  explicit GaussLegendre(int n);
};

/// Push-forward of the uniform distribution on [0, L] under D, sampled by
/// n_quad Gauss–Legendre nodes per segment.
DiffractionMeasure measure_from_profile(const PiecewiseProfile& profile, int n_quad = 32);

struct AssumptionReport {
  /// smallest C with |V′(a)| ≤ C (a^{γ₁−1} + a^{γ₂−1}) on the grid
  double growth_constant = 0.0;
  /// min over the grid of V′(a)a − γ₀V(a)
  double homogeneity_min = 0.0;
  bool homogeneity_holds = false;
  /// V(a) > 0 somewhere on the grid
  bool positive_somewhere = false;
  /// min of V(a)/a^κ over grid points in (0, eps]; empty without κ
  std::optional<double> small_amplitude_constant;
  /// min over grid and sampled t ≥ 1 of V(ta) − t^{γ₀}V(a), scaled by |V(ta)|+1
  double scaling_min = 0.0;
  bool scaling_holds = false;
};

AssumptionReport check_assumptions(const NonlinearitySpec& spec,
                                   std::span<const double> grid,
                                   double small_amplitude_eps = 0.1);

/// Log-spaced grid on [a_min, a_max].
std::vector<double> amplitude_grid(double a_min, double a_max, int points);

}  // namespace dms

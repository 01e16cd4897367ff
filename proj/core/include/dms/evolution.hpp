#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dms/lattice.hpp"

namespace dms {

// Free discrete Schrödinger propagator T_r = e^{irΔ} on l²(ℤ).
//
// Every backend realizes the same map "embed f (radius M) into the infinite
// lattice, apply T_r, restrict to radius M + margin". The restriction of the
// adjoint is exposed too, so that functionals built on top of a Propagator
// have exactly consistent derivatives.

enum class EvolutionVariant {
  taylor_scaled,  ///< scaled Taylor series of e^{irΔ_D} on the output box
  closed_kernel,  ///< Toeplitz product with e^{-2ir} i^|n| J_|n|(2r)
  spectral_ring,  ///< FFT diagonalization on a periodic ring
};

struct EvolutionMethod {
  EvolutionVariant variant = EvolutionVariant::taylor_scaled;
  /// Relative size of the last Taylor term kept.
  double series_tolerance = 1e-17;
  /// Extra sites on each side of the input box; sized by required_margin
  /// from leak_tolerance when unset.
  std::optional<int> margin;
  /// Kernel-bound amplitude allowed to leak past the output box.
  double leak_tolerance = 1e-13;

  void validate() const;
};

const char* to_string(EvolutionVariant v);
EvolutionVariant parse_evolution_variant(std::string_view name);

/// min(1, e^{4|r|} (4|r|)^{|n|} / |n|!), the a-priori bound on |⟨x|T_r|y⟩|.
double kernel_bound(double r, long n);

/// ⟨x|T_r|y⟩ for n = x - y from the power series of e^{irΔ}. Small |r| is
/// summed directly in extended precision; larger |r| squares the kernel of
/// r / 2^s. Valid for |r| ≤ 16.
Complex kernel_entry(double r, long n, double series_tolerance = 1e-17);

/// Closed form e^{-2ir} i^{|n|} J_{|n|}(2r).
Complex kernel_entry_bessel(double r, long n);

/// Smallest m with e^{4|r|}(4|r|)^m / m! < tol.
int required_margin(double r, double tol);

/// T_r f on radius M + margin.
LatticeField apply_evolution(double r, const LatticeField& f,
                             const EvolutionMethod& method = {});

/// Precomputed application of T_r from radius `in_radius` to radius
/// `out_radius`. Immutable after construction; apply/adjoint are const and
/// may be called concurrently.
class Propagator {
 public:
  Propagator(double r, int in_radius, int out_radius,
             const EvolutionMethod& method);
  ~Propagator();
  Propagator(Propagator&&) noexcept;
  Propagator& operator=(Propagator&&) noexcept;

  double time() const { return r_; }
  int in_radius() const { return in_radius_; }
  int out_radius() const { return out_radius_; }
  EvolutionVariant variant() const { return variant_; }

  /// out (size 2*out_radius+1) = restrict ∘ T_r ∘ embed (in, size 2*in_radius+1)
  void apply(std::span<const Complex> in, std::span<Complex> out) const;
  /// Adjoint of apply: out (input box) = restrict ∘ T_{-r} ∘ embed (in, output box)
  void adjoint(std::span<const Complex> in, std::span<Complex> out) const;

  LatticeField apply(const LatticeField& f) const;

  struct Impl;

 private:
  double r_;
  int in_radius_;
  int out_radius_;
  EvolutionVariant variant_;
  std::unique_ptr<Impl> impl_;
};

/// e^{irΔ_D} v in place, where Δ_D is the box Laplacian with zero boundary.
/// Unitary on the box up to the series tolerance.
void taylor_evolve_in_place(double r, std::span<Complex> v,
                            double series_tolerance = 1e-17);

}  // namespace dms

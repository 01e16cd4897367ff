#pragma once

#include <vector>

#include "dms/evolution.hpp"
#include "dms/lattice.hpp"
#include "dms/profile.hpp"

namespace dms {

/// Everything that defines the constrained minimization at fixed power.
struct Problem {
  double d_av = 0.0;
  DiffractionMeasure measure = DiffractionMeasure::dirac();
  NonlinearitySpec nonlinearity = NonlinearitySpec::kerr();
  double lambda = 1.0;
  EvolutionMethod method;

  void validate() const;
};

/// H(f) = d_av/2 ‖D₊f‖² − N(f) with N(f) = Σ_j w_j Σ_x V(|T_{r_j} f(x)|) for
/// fields on a fixed box. Propagators for every atom are built once; the
/// object is immutable and evaluation is safe from several threads.
class EnergyFunctional {
 public:
  EnergyFunctional(const Problem& problem, int box_radius);

  int radius() const { return radius_; }
  const Problem& problem() const { return problem_; }

  struct Evaluation {
    double kinetic = 0.0;    ///< d_av/2 ‖D₊f‖²
    double potential = 0.0;  ///< N(f)
    double energy = 0.0;     ///< kinetic − potential
    /// DN(f)[f] = Re⟨Σ w_j T_{−r_j} P(T_{r_j} f), f⟩
    double potential_pairing = 0.0;
    LatticeField gradient;   ///< empty unless requested
  };

  Evaluation evaluate(const LatticeField& f, bool with_gradient) const;
  double potential(const LatticeField& f) const;
  double hamiltonian(const LatticeField& f) const;
  LatticeField gradient(const LatticeField& f) const;
  /// Σ_j w_j T_{−r_j} P(T_{r_j} f), the derivative of N.
  LatticeField potential_gradient(const LatticeField& f) const;

  /// T_{r_j} f on the widened box of atom j.
  LatticeField evolved(std::size_t atom, const LatticeField& f) const;

 private:
  void check(const LatticeField& f) const;
  void atom_terms(const LatticeField& f, bool with_gradient, std::vector<double>& n,
                  std::vector<LatticeField>* grads) const;

  Problem problem_;
  int radius_;
  std::vector<Propagator> propagators_;
};

double nonlocal_potential(const Problem& problem, const LatticeField& f);
double hamiltonian(const Problem& problem, const LatticeField& f);
/// g with DH(f)[h] = Re⟨g, h⟩.
LatticeField gradient(const Problem& problem, const LatticeField& f);
/// ω = Re⟨g, f⟩ / ‖f‖².
double lagrange_multiplier(const Problem& problem, const LatticeField& f);
/// ‖g − ωf‖ / ‖f‖.
double el_residual(const Problem& problem, const LatticeField& f, double omega);

}  // namespace dms

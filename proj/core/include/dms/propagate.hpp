#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dms/energy.hpp"
#include "dms/lattice.hpp"
#include "dms/profile.hpp"

namespace dms {

// Time integration on a fixed box with zero boundary values.
//
// Averaged flow:  i∂_t v = −d_av Δ v − Σ_j w_j T_{−r_j} P(T_{r_j} v)
// Full flow:      i∂_t u = −d(t) Δ u − P(u),  d(t) = ε⁻¹ d₀(t/ε) + d_av
//
// With T_r = e^{irΔ} and D(s) = ∫₀ˢ d₀, u = T_{D(t/ε)} v turns the full flow
// into the averaged one up to the fast oscillation. A minimizer φ with
// multiplier ω evolves as v(t) = e^{−iωt} φ under the averaged flow.

enum class PropagationScheme { strang, rk4 };
const char* to_string(PropagationScheme s);
PropagationScheme parse_propagation_scheme(std::string_view name);

struct PropagationConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  double epsilon = 0.1;  ///< fast scale, full flow only
  PropagationScheme scheme = PropagationScheme::rk4;  ///< averaged flow only
  /// d₀ of the full flow, must have mean zero over one period
  PiecewiseProfile profile;
  /// trajectory row every this many steps (the last step is always recorded)
  int record_every = 10;
  /// field snapshot every this many steps, 0 for none
  int snapshot_every = 0;
  /// full flow: the step is capped at ε·period / fast_steps
  int fast_steps = 200;

  void validate() const;
};

/// Averaged flow on the box of `energy`; reuses its propagators.
class AveragedFlow {
 public:
  explicit AveragedFlow(EnergyFunctional energy);

  const EnergyFunctional& energy() const { return energy_; }

  /// One step. Strang: half linear flows around the nonlocal substep, which is
  /// exact for μ = w δ₀ and one rk4 step otherwise. rk4: classical rk4 on
  /// the whole right-hand side. Throws NumericError when ‖v‖₂ drifts by more
  /// than 1e−6 relative in one step.
  LatticeField step(const LatticeField& v, double dt, PropagationScheme scheme) const;

  /// i times the right-hand side, ∂_t v.
  LatticeField velocity(const LatticeField& v) const;

 private:
  bool local_ = false;
  double local_weight_ = 0.0;
  EnergyFunctional energy_;
};

LatticeField step_averaged(const Problem& problem, const LatticeField& v, double dt,
                           PropagationScheme scheme = PropagationScheme::rk4);

/// One Strang step of the full flow from time t, split at the breakpoints of
/// d₀(·/ε). The linear substeps use the exact ∫d over each piece, the
/// nonlinear substep is the exact phase flow u ← e^{i p(|u|) h} u.
LatticeField step_full(const Problem& problem, const LatticeField& u, double t, double dt,
                       const PropagationConfig& config);

struct TrajectoryPoint {
  double t = 0.0;
  double norm = 0.0;       ///< ‖·‖₂
  double energy = 0.0;     ///< averaged H (of T_{−D(t/ε)} u for the full flow)
  double deviation = 0.0;  ///< amplitude deviation from the reference, / ‖φ‖₂
};

struct Snapshot {
  long step = 0;
  double t = 0.0;
  LatticeField field;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  std::vector<Snapshot> snapshots;
  double max_deviation = 0.0;  ///< over every step, not only recorded rows
  double max_norm_drift = 0.0;  ///< max |‖·‖₂² − ‖φ‖₂²| / ‖φ‖₂²
  double max_energy_drift = 0.0;  ///< over recorded rows, |H − H(0)| / max(|H(0)|, 1e−300)
  long steps = 0;
};

/// Averaged flow from φ; deviation is ‖|v(t)| − |φ|‖₂ / ‖φ‖₂.
Trajectory propagate_averaged(const Problem& problem, const LatticeField& phi,
                              const PropagationConfig& config);

/// Full flow from u₀ = φ; deviation is ‖|u(t)| − |T_{D(t/ε)} φ|‖₂ / ‖φ‖₂.
Trajectory propagate_full(const Problem& problem, const LatticeField& phi,
                          const PropagationConfig& config);

struct BreatherRun {
  double epsilon = 0.0;
  double deviation = 0.0;
  long steps = 0;
  double norm_drift = 0.0;
  std::string error;  ///< empty on success
};

struct BreatherReport {
  double omega = 0.0;
  double slow_period = 0.0;  ///< 2π/|ω|
  /// max_t ‖|v(t)| − |φ|‖₂/‖φ‖₂ for the averaged flow over the same window
  double averaged_deviation = 0.0;
  std::vector<BreatherRun> runs;
  bool strictly_decreasing = false;  ///< dev(ε) decreases as ε decreases
};

/// Propagates the full flow from the soliton φ over one slow period 2π/|ω|
/// for each ε; t_end of the config is ignored. config.profile is the d₀ whose
/// push-forward is problem.measure.
BreatherReport breather_experiment(const Problem& problem, const LatticeField& phi,
                                   double omega, const PropagationConfig& config,
                                   std::vector<double> epsilons);

void write_trajectory_csv(std::ostream& out, const Trajectory& tr);
nlohmann::json to_json(const BreatherReport& r);

}  // namespace dms

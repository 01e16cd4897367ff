#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dms/energy.hpp"
#include "dms/minimizer.hpp"

namespace dms {

struct QuotientResult {
  double value = 0.0;  ///< best N(f)/‖D₊f‖² found, a lower bound on R(λ)
  LatticeField field;
  std::string start;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  ///< quotient after each accepted step of the best run
};

/// Projected ascent of N(f)/‖D₊f‖² on the sphere ‖f‖² = λ over a fixed box
/// (config.box.box_radius). Starts: single site, exponential profiles,
/// random fields, and a box-filling sine. Flat iterates (‖D₊f‖ < 1e−10) are
/// dropped.
QuotientResult r_quotient_max(const Problem& problem, double lambda, const SolveConfig& config);

struct BisectionStep {
  double lambda = 0.0;
  double value = 0.0;  ///< E_λ for the energy bisection, R̂(λ) − d_av/2 otherwise
  bool above = false;  ///< λ judged above the threshold
};

struct ThresholdEstimate {
  double lambda_cr = 0.0;       ///< from the sign of E_λ
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  std::vector<BisectionStep> trace;
  std::optional<double> lambda_cr_quotient;  ///< cross-check from R̂(λ) = d_av/2
  std::vector<BisectionStep> quotient_trace;
};

/// Smallest-energy value over descent runs started from √(λ/λ_ref)·h and the
/// standard initial fields.
double energy_at(const Problem& problem, double lambda, const SolveConfig& config,
                 const LatticeField* seed_field, double seed_lambda);

/// Bisection on the sign of E_λ over [bracket_lo, bracket_hi] to relative
/// width rel_width. Throws NumericError when the bracket has no sign change.
ThresholdEstimate lambda_cr_estimate(const Problem& problem_template, double d_av,
                                     double bracket_lo, double bracket_hi,
                                     const SolveConfig& config, double rel_width = 1e-3,
                                     bool quotient_cross_check = true);

struct ScalingPair {
  double lambda1 = 0.0, lambda2 = 0.0;
  double ratio = 0.0;  ///< R̂(λ₂) / ((λ₂/λ₁)^{(γ₀−2)/2} R̂(λ₁)), should be ≥ 1 − tol
  bool pass = false;
};

struct SandwichCheck {
  double lambda0 = 0.0;
  double lower = 0.0;  ///< λ₀ min(d/(2R̂), 1)^{2/(γ₀−2)}
  double upper = 0.0;  ///< λ₀ max(d/(2R̂), 1)^{2/(γ₀−2)}
  bool lower_pass = false;
  bool upper_pass = false;
};

struct ScalingReport {
  std::vector<ScalingPair> pairs;
  std::vector<SandwichCheck> sandwich;
  bool all_pass = true;
};

/// Lower-scaling law on all ordered pairs λ₁ < λ₂ and, when a threshold
/// estimate is given, the quantitative λ_cr bounds with R̂ as R₀ proxy.
ScalingReport scaling_checks(const std::vector<double>& lambdas, const std::vector<double>& r_hat,
                             double gamma0, double tol = 1e-3,
                             std::optional<double> d_av = std::nullopt,
                             std::optional<double> lambda_cr = std::nullopt);

struct ThresholdReport {
  std::vector<double> lambdas;
  std::vector<double> r_hat;
  std::vector<double> energies;  ///< best E on the fixed box, an upper bound on E_λ
  std::optional<double> r0_hat;  ///< mean R̂/λ^{(γ−2)/2} for a pure power
  std::optional<ThresholdEstimate> estimate;
  ScalingReport scaling;
};

/// R̂ and E_λ on a grid, the scaling checks, and (when bracket given) λ_cr.
ThresholdReport threshold_report(const Problem& problem, const std::vector<double>& lambdas,
                                 const SolveConfig& config,
                                 std::optional<std::pair<double, double>> bracket);

void write_threshold_csv(std::ostream& out, const ThresholdReport& report);
nlohmann::json to_json(const ThresholdReport& report);

}  // namespace dms

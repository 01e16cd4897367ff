#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dms/energy.hpp"
#include "dms/lattice.hpp"
#include "dms/minimizer.hpp"
#include "dms/profile.hpp"

namespace dms {

// Randomized checks of exact identities and explicit-constant inequalities.
// Trial i of a check draws its inputs from Rng(derive_seed(seed, i)), so the
// (id, seed, trials) triple reproduces a report and its witness.

/// Slack allowed above ratio 1 for inequalities.
inline constexpr double kInequalitySlack = 1e-9;
/// Largest relative error accepted for identities.
inline constexpr double kIdentityTolerance = 1e-11;

enum class CheckKind {
  identity,    ///< worst relative error, pass if ≤ kIdentityTolerance
  inequality,  ///< worst observed/bound, pass if ≤ 1 + kInequalitySlack
  fitted,      ///< fitted constant over the doubled range / over the base range
  strict,      ///< worst observed/bound, pass if < 1
};
const char* to_string(CheckKind k);

struct Witness {
  long trial = -1;         ///< −1 for checks that are not trial based
  std::uint64_t seed = 0;  ///< seed of the trial's generator
  std::string detail;      ///< parameters that located the worst case
  /// Inputs of the worst case, kept so that failures can be persisted.
  std::vector<LatticeField> fields;
};

struct SubCheck {
  std::string name;
  CheckKind kind = CheckKind::inequality;
  double worst = 0.0;
  double tolerance = 0.0;  ///< pass threshold, see CheckKind
  long samples = 0;
  bool pass = true;
  Witness witness;
};

struct EstimateReport {
  std::string id;
  int trials = 0;
  std::uint64_t seed = 0;
  /// max observed/bound over inequality, strict and fitted parts
  double worst_ratio = 0.0;
  /// max relative error over identity parts
  double identity_error = 0.0;
  bool pass = true;
  /// witness of the first failing part, else of the part with the largest ratio
  Witness witness;
  std::vector<SubCheck> parts;
};

nlohmann::json to_json(const EstimateReport& r);

/// IMS localization: the exact identity for Re⟨ξ²f, −Δf⟩ and the lower bounds
/// for a single cutoff and for partitions Σξ_j² = 1 (random and smooth).
EstimateReport ims_check(int trials, std::uint64_t seed, int radius = 24);

struct BilinearOptions {
  std::vector<double> bounds{0.25, 0.5, 1.0};         ///< B
  std::vector<long> separations{0, 4, 8, 16, 32};     ///< s
  std::vector<double> exponents{1.0, 2.0, std::numeric_limits<double>::infinity()};
  int r_samples = 33;  ///< r grid on [−B, B]
  int width = 12;      ///< support width of f₁, f₂
};

/// min(1, 8e^{16B}(4B)^k/k!) with k = ⌈s/2⌉.
double bilinear_bound(double B, long s);

/// sup_{|r|≤B} ‖T_rf₁·T_rf₂‖_p against bilinear_bound·‖f₁‖₂‖f₂‖₂, plus the
/// factorial decay of the observed norm for s > 8B.
EstimateReport bilinear_check(int trials, std::uint64_t seed,
                              const BilinearOptions& opt = {});

/// M_μ^γ(f₁,f₂) = ∫Σ_x |T_rf₁||T_rf₂|(|T_rf₁|+|T_rf₂|)^{γ−2} μ(dr).
double m_functional(const DiffractionMeasure& mu, double gamma,
                    const LatticeField& f1, const LatticeField& f2);
/// L_μ^γ(f₁,f₂) = ∫‖T_rf₁ |T_rf₂|^{γ−1}‖₁ μ(dr).
double l_functional(const DiffractionMeasure& mu, double gamma,
                    const LatticeField& f1, const LatticeField& f2);
/// N(f₁+f₂) − N(f₁) − N(f₂), summed pointwise from split_defect.
double splitting_defect(const Problem& problem, const LatticeField& f1,
                        const LatticeField& f2);
/// dist(supp f₁, supp f₂); −1 when either field vanishes.
long support_distance(const LatticeField& f1, const LatticeField& f2);

struct SplittingOptions {
  std::vector<long> separations{0, 2, 4, 8, 16, 24, 32};
  double alpha = 0.25;
  int width = 10;
  /// fitted constants may grow by this factor when the range is doubled
  double stability_tolerance = 0.1;
  /// pointwise samples per trial in the (z, w) check
  int pointwise_samples = 200;
};

/// Lemma-type pointwise bound on V(|z+w|) − V(|z|) − V(|w|), the splitting
/// identity, and the s^{−αs} envelopes of the M-functionals and of the
/// splitting defect, each as a fitted constant stable under range doubling.
EstimateReport splitting_check(int trials, std::uint64_t seed, const Problem& problem,
                               const SplittingOptions& opt = {});

/// Weinstein-type ‖f‖_γ^γ ≤ ‖f‖₂^{γ−2}‖D₊f‖₂² (γ ≥ 6), ‖f‖∞² ≤ ‖f‖₂‖D₊f‖₂
/// and the l^p difference bound.
EstimateReport functional_inequalities_check(int trials, std::uint64_t seed);

struct SubadditivityOptions {
  /// Bound slack for solver error: abs_tol + rel_tol·|E_λ|.
  double abs_tol = 1e-9;
  double rel_tol = 1e-6;
  /// Strictness is only required where E_{2λ} is below this.
  double strict_threshold = -1e-8;
};

/// E_{λ₁} + E_{λ₂} ≥ [1 − (2^{γ₀/2}−2)(δ/λ)^{γ₀/2}]E_λ over all grid triples
/// with λ₁ + λ₂ ≤ λ, δ ≤ min(λ₁, λ₂), δ < λ/2; and 2E_λ > E_{2λ} where E < 0.
EstimateReport subadditivity_check(const EnergyCurve& curve, double gamma0,
                                   const SubadditivityOptions& opt = {});

/// l^p growth, norm continuity, kernel bound, unitarity, group law and
/// commutation with Δ for random (f, r, p), r ∈ [−r_max, r_max].
EstimateReport evolution_bounds_check(int trials, std::uint64_t seed,
                                      double r_max = 2.0,
                                      EvolutionVariant variant = EvolutionVariant::taylor_scaled);

}  // namespace dms

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dms/energy.hpp"
#include "dms/lattice.hpp"

namespace dms {

struct SolveConfig {
  int max_iters = 10000;
  /// Stop when ‖g − ωf‖₂/‖f‖₂ falls below this.
  double grad_tol = 1e-9;
  double step_init = 0.1;
  double backtrack = 0.5;
  /// Armijo constant.
  double sufficient_decrease = 1e-4;
  int recenter_every = 25;
  /// Number of random initial fields besides the structured ones.
  int restarts = 1;
  std::uint64_t seed = 1;
  BoxPolicy box;
  bool auto_grow = true;
  int max_box_radius = 20000;

  void validate() const;
};

enum class SolveStatus { converged, not_converged, no_negative_energy };
const char* to_string(SolveStatus s);

struct IterationRecord {
  double energy = 0.0;
  double grad_norm = 0.0;
};

struct StartSummary {
  std::string label;
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct SolveResult {
  LatticeField field;
  double lambda = 0.0;
  double energy = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  double omega = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  SolveStatus status = SolveStatus::not_converged;
  std::string start;
  std::vector<IterationRecord> history;
  std::vector<StartSummary> starts;
};

/// Projected gradient descent of H on the sphere ‖f‖₂² = λ with Armijo
/// backtracking, Barzilai–Borwein trial steps, recentering and box growth.
/// Runs every initial field and returns the lowest energy found.
SolveResult minimize(const Problem& problem, const SolveConfig& config);

/// Single descent run from a given field (rescaled onto the sphere).
SolveResult minimize_from(const Problem& problem, const SolveConfig& config,
                          LatticeField initial, std::string label = "given");

/// Structured initial fields for a problem: single site, exponential profiles.
std::vector<std::pair<std::string, LatticeField>> initial_fields(const Problem& problem,
                                                                 const SolveConfig& config);

struct CurvePoint {
  double lambda = 0.0;
  double energy = 0.0;
  double omega = 0.0;
  double residual = 0.0;
  SolveStatus status = SolveStatus::not_converged;
  std::string error;  ///< solver failure message, empty on success
};

struct SubadditivityPair {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double gap = 0.0;  ///< E_{λ₁} + E_{λ₂} − E_{λ₁+λ₂}
};

struct EnergyCurve {
  std::vector<CurvePoint> points;
  std::vector<std::size_t> positive_energy;  ///< indices with E > 1e−10
  std::vector<std::size_t> monotone_breaks;  ///< i with E_{i+1} > E_i + tol
  std::vector<SubadditivityPair> pairs;      ///< all grid pairs with λ₁+λ₂ on the grid
  std::vector<SubadditivityPair> strict_failures;
  std::vector<SolveResult> results;
};

EnergyCurve energy_curve(const Problem& problem_template, const std::vector<double>& lambdas,
                         const SolveConfig& config);

nlohmann::json to_json(const SolveResult& r, const Problem& problem,
                       const std::string& field_ref);
nlohmann::json to_json(const EnergyCurve& c);

}  // namespace dms

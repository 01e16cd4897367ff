#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "dms/lattice.hpp"

namespace dms {

/// β(n) = (Σ_{|x|≥n} |f(x)|²)^{1/2} for n = 0..M+1; β(M+1) = 0.
std::vector<double> tail_distribution(const LatticeField& f);

struct FitWindow {
  int lo = 0;
  int hi = -1;
  int points() const { return hi >= lo ? hi - lo + 1 : 0; }
};

/// n_lo: first n with β(n) < 0.1 β(0); n_hi: last n with β(n) > 100·floor.
FitWindow fit_window(const std::vector<double>& beta, double floor);

struct RateFit {
  double rate = 0.0;       ///< fitted slope
  double intercept = 0.0;
  double residual = 0.0;   ///< rms of the regression residuals
  FitWindow window;
  double floor = 0.0;
};

/// Slope of −ln β(n) against n. Needs at least 8 window points.
RateFit fit_exp_rate(const std::vector<double>& beta, double floor = 1e-13);
/// Slope of −ln β(n) against (n+1) ln(n+1). Needs at least 8 window points.
RateFit fit_superexp_rate(const std::vector<double>& beta, double floor = 1e-13);

/// acosh(|ω|/(2 d_av) + 1), the rate solving 2 d_av (cosh ν − 1) = |ω|.
double heuristic_rate(double omega, double d_av);

/// max(min_floor, leakage), where leakage is the largest edge amplitude.
double tail_floor_for(const LatticeField& f, double min_floor = 1e-13);

struct TailStats {
  std::vector<double> beta;
  double floor = 0.0;
  std::optional<RateFit> exp_fit;
  std::optional<RateFit> superexp_fit;
};

/// β and both fits; a fit is left empty when its window is too small.
TailStats analyze_tail(const LatticeField& f, double min_floor = 1e-13);

struct SelfConsistency {
  double c_star = 0.0;       ///< on [0, n_max] × [0, m_max]
  double c_star_half = 0.0;  ///< on [0, n_max/2] × [0, m_max/2]
  int n_max = 0;
  int m_max = 0;
  int arg_n = 0;
  int arg_m = 0;
  bool finite = false;
  bool stable = false;       ///< c_star ≤ (1 + tol)·c_star_half
};

/// C* = max β(n+m) / (β(n)^θ + (m+1)^{−α(m+1)}). Pairs with β(n+m) ≤ floor
/// are skipped.
SelfConsistency self_consistency_check(const std::vector<double>& beta, double theta,
                                       double alpha, int n_max, int m_max,
                                       double floor = 0.0, double growth_tol = 1e-6);

/// CSV rows "n,beta,model" with the fitted model evaluated on every n.
void write_tail_csv(std::ostream& out, const std::vector<double>& beta, const RateFit* exp_fit,
                    const RateFit* superexp_fit);

}  // namespace dms

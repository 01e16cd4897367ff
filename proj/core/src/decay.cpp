#include "dms/decay.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "dms/diagnostics.hpp"
#include "dms/summation.hpp"

namespace dms {

std::vector<double> tail_distribution(const LatticeField& f) {
  const int m = f.radius();
  std::vector<double> beta(static_cast<std::size_t>(m + 2), 0.0);
  CompensatedSum acc;
  for (int n = m; n >= 0; --n) {
    acc += std::norm(f[n]);
    if (n > 0) acc += std::norm(f[-n]);
    beta[static_cast<std::size_t>(n)] = std::sqrt(std::max(0.0, acc.value()));
  }
  return beta;
}

FitWindow fit_window(const std::vector<double>& beta, double floor) {
  FitWindow w;
  if (beta.empty()) return w;
  const int size = static_cast<int>(beta.size());
  w.lo = size;
  for (int n = 0; n < size; ++n) {
    if (beta[static_cast<std::size_t>(n)] < 0.1 * beta[0]) {
      w.lo = n;
      break;
    }
  }
  w.hi = -1;
  for (int n = size - 1; n >= 0; --n) {
    if (beta[static_cast<std::size_t>(n)] > 100.0 * floor) {
      w.hi = n;
      break;
    }
  }
  return w;
}

namespace {

RateFit regress(const std::vector<double>& beta, double floor, bool superexp) {
  RateFit fit;
  fit.floor = floor;
  fit.window = fit_window(beta, floor);
  if (fit.window.points() < 8) {
    throw NumericError("decay fit window has " + std::to_string(fit.window.points()) +
                       " points, need at least 8");
  }
  const auto regressor = [&](int n) {
    return superexp ? (n + 1.0) * std::log(n + 1.0) : static_cast<double>(n);
  };
  const int k = fit.window.points();
  double sx = 0, sy = 0;
  for (int n = fit.window.lo; n <= fit.window.hi; ++n) {
    sx += regressor(n);
    sy += -std::log(beta[static_cast<std::size_t>(n)]);
  }
  const double mx = sx / k, my = sy / k;
  double sxx = 0, sxy = 0;
  for (int n = fit.window.lo; n <= fit.window.hi; ++n) {
    const double dx = regressor(n) - mx;
    sxx += dx * dx;
    sxy += dx * (-std::log(beta[static_cast<std::size_t>(n)]) - my);
  }
  fit.rate = sxy / sxx;
  fit.intercept = my - fit.rate * mx;
  double ss = 0;
  for (int n = fit.window.lo; n <= fit.window.hi; ++n) {
    const double e = -std::log(beta[static_cast<std::size_t>(n)]) -
                     (fit.intercept + fit.rate * regressor(n));
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / k);
  return fit;
}

}  // namespace

RateFit fit_exp_rate(const std::vector<double>& beta, double floor) {
  return regress(beta, floor, false);
}

RateFit fit_superexp_rate(const std::vector<double>& beta, double floor) {
  return regress(beta, floor, true);
}

double heuristic_rate(double omega, double d_av) {
  if (!(omega < 0.0) || !(d_av > 0.0)) {
    throw std::invalid_argument("heuristic_rate needs omega < 0 and d_av > 0");
  }
  return std::acosh(-omega / (2.0 * d_av) + 1.0);
}

double tail_floor_for(const LatticeField& f, double min_floor) {
  const double edge = std::max(std::abs(f[-f.radius()]), std::abs(f[f.radius()]));
  return std::max(min_floor, edge);
}

TailStats analyze_tail(const LatticeField& f, double min_floor) {
  TailStats s;
  s.beta = tail_distribution(f);
  s.floor = tail_floor_for(f, min_floor);
  try {
    s.exp_fit = fit_exp_rate(s.beta, s.floor);
  } catch (const NumericError&) {
  }
  try {
    s.superexp_fit = fit_superexp_rate(s.beta, s.floor);
  } catch (const NumericError&) {
  }
  return s;
}

namespace {

double c_star_on(const std::vector<double>& beta, double theta, double alpha, int n_max,
                 int m_max, double floor, int* arg_n, int* arg_m) {
  double best = 0.0;
  const int size = static_cast<int>(beta.size());
  for (int n = 0; n <= n_max; ++n) {
    for (int m = 0; m <= m_max; ++m) {
      if (n + m >= size || n >= size) continue;
      const double num = beta[static_cast<std::size_t>(n + m)];
      if (!(num > floor)) continue;
      const double den = std::pow(beta[static_cast<std::size_t>(n)], theta) +
                         std::pow(m + 1.0, -alpha * (m + 1.0));
      const double q = num / den;
      if (q > best) {
        best = q;
        if (arg_n) *arg_n = n;
        if (arg_m) *arg_m = m;
      }
    }
  }
  return best;
}

}  // namespace

SelfConsistency self_consistency_check(const std::vector<double>& beta, double theta,
                                       double alpha, int n_max, int m_max, double floor,
                                       double growth_tol) {
  if (!(theta > 1.0)) throw std::invalid_argument("self-consistency needs theta > 1");
  if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("need 0 < alpha < 1/2");
  if (n_max < 0 || m_max < 0) throw std::invalid_argument("negative scan range");
  SelfConsistency r;
  r.n_max = n_max;
  r.m_max = m_max;
  r.c_star = c_star_on(beta, theta, alpha, n_max, m_max, floor, &r.arg_n, &r.arg_m);
  r.c_star_half = c_star_on(beta, theta, alpha, n_max / 2, m_max / 2, floor, nullptr, nullptr);
  r.finite = std::isfinite(r.c_star);
  r.stable = r.finite && r.c_star <= (1.0 + growth_tol) * r.c_star_half;
  return r;
}

void write_tail_csv(std::ostream& out, const std::vector<double>& beta, const RateFit* exp_fit,
                    const RateFit* superexp_fit) {
  out << "n,beta";
  if (exp_fit) out << ",exp_model";
  if (superexp_fit) out << ",superexp_model";
  out << '\n';
  for (std::size_t n = 0; n < beta.size(); ++n) {
    fmt::print(out, "{},{:.17g}", n, beta[n]);
    if (exp_fit) fmt::print(out, ",{:.17g}", std::exp(-(exp_fit->intercept + exp_fit->rate * n)));
    if (superexp_fit) {
      const double x = (n + 1.0) * std::log(n + 1.0);
      fmt::print(out, ",{:.17g}", std::exp(-(superexp_fit->intercept + superexp_fit->rate * x)));
    }
    out << '\n';
  }
}

}  // namespace dms

#include "dms/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dms/summation.hpp"

namespace dms {

DiffractionMeasure::DiffractionMeasure(std::vector<Atom> atoms, double merge_tol) {
  if (atoms.empty()) throw std::invalid_argument("measure needs at least one atom");
  for (const auto& a : atoms) {
    if (!std::isfinite(a.node) || !std::isfinite(a.weight) || a.weight < 0.0) {
      throw std::invalid_argument("atom weights must be finite and >= 0");
    }
  }
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& a, const Atom& b) { return a.node < b.node; });
  for (const auto& a : atoms) {
    if (!atoms_.empty() && a.node - atoms_.back().node <= merge_tol) {
      auto& last = atoms_.back();
      const double w = last.weight + a.weight;
      if (w > 0.0) last.node = (last.node * last.weight + a.node * a.weight) / w;
      last.weight = w;
    } else {
      atoms_.push_back(a);
    }
  }
  CompensatedSum mass;
  for (const auto& a : atoms_) {
    mass += a.weight;
    support_bound_ = std::max(support_bound_, std::abs(a.node));
  }
  total_mass_ = mass.value();
}

DiffractionMeasure DiffractionMeasure::dirac() { return DiffractionMeasure({{0.0, 1.0}}); }

void DiffractionMeasure::widen_support_bound(double b) {
  support_bound_ = std::max(support_bound_, b);
}

double DiffractionMeasure::moment(int k) const {
  CompensatedSum s;
  for (const auto& a : atoms_) s += a.weight * std::pow(a.node, k);
  return s.value();
}

// ---------------------------------------------------------------------------

NonlinearitySpec NonlinearitySpec::kerr() { return power(0.25, 4.0); }

NonlinearitySpec NonlinearitySpec::power(double c, double s) {
  NonlinearitySpec spec;
  spec.terms = {{c, s}};
  spec.gamma0 = spec.gamma1 = spec.gamma2 = s;
  if (s < 6.0) spec.kappa = std::max(2.0, s);
  return spec;
}

NonlinearitySpec NonlinearitySpec::from_terms(std::vector<PowerTerm> terms, double gamma0) {
  if (terms.empty()) throw std::invalid_argument("nonlinearity needs at least one term");
  NonlinearitySpec spec;
  spec.gamma1 = spec.gamma2 = terms.front().exponent;
  for (const auto& t : terms) {
    spec.gamma1 = std::min(spec.gamma1, t.exponent);
    spec.gamma2 = std::max(spec.gamma2, t.exponent);
  }
  spec.terms = std::move(terms);
  spec.gamma0 = gamma0;
  return spec;
}

void NonlinearitySpec::validate() const {
  if (is_power_sum()) {
    if (terms.empty()) throw std::invalid_argument("nonlinearity needs at least one term");
    for (const auto& t : terms) {
      if (!std::isfinite(t.coefficient) || !(t.exponent > 2.0) || !std::isfinite(t.exponent)) {
        throw std::invalid_argument("power terms need finite c and exponent > 2");
      }
    }
  }
  if (!(gamma1 > 2.0) || !(gamma1 <= gamma2) || !std::isfinite(gamma2)) {
    throw std::invalid_argument("need 2 < gamma1 <= gamma2 < inf");
  }
  if (!(gamma0 > 2.0)) throw std::invalid_argument("need gamma0 > 2");
  if (kappa && !(*kappa >= 2.0 && *kappa < 6.0)) {
    throw std::invalid_argument("need 2 <= kappa < 6");
  }
}

double NonlinearitySpec::V(double a) const {
  if (a < 0.0) throw std::invalid_argument("V: negative amplitude");
  if (!is_power_sum()) return custom_v(a);
  double v = 0.0;
  for (const auto& t : terms) v += t.coefficient * std::pow(a, t.exponent);
  return v;
}

double NonlinearitySpec::dV(double a) const {
  if (a < 0.0) throw std::invalid_argument("V': negative amplitude");
  if (!is_power_sum()) return custom_dv(a);
  double v = 0.0;
  for (const auto& t : terms) v += t.coefficient * t.exponent * std::pow(a, t.exponent - 1.0);
  return v;
}

double NonlinearitySpec::p(double a) const {
  if (a < 0.0) throw std::invalid_argument("p: negative amplitude");
  if (!is_power_sum()) return a == 0.0 ? 0.0 : custom_dv(a) / a;
  double v = 0.0;
  for (const auto& t : terms) {
    v += t.coefficient * t.exponent *
         (t.exponent == 4.0 ? a * a : std::pow(a, t.exponent - 2.0));
  }
  return v;
}

Complex NonlinearitySpec::P(Complex z) const {
  if (z == Complex{}) return {};
  return p(std::abs(z)) * z;
}

double NonlinearitySpec::split_defect(Complex z, Complex w) const {
  if (std::norm(z) < std::norm(w)) std::swap(z, w);
  const double pz = std::abs(z);
  const double qw = std::abs(w);
  if (qw == 0.0) return 0.0;
  const double u = std::abs(z + w);
  if (!is_power_sum()) return V(u) - V(pz) - V(qw);
  // u - |z| from the difference of squares, then u^s - |z|^s = |z|^s expm1(s log1p(.))
  const double du = (2.0 * (std::conj(z) * w).real() + std::norm(w)) / (u + pz);
  const double rel = std::log1p(du / pz);
  double total = 0.0;
  for (const auto& t : terms) {
    const double s = t.exponent;
    total += t.coefficient * (std::pow(pz, s) * std::expm1(s * rel) - std::pow(qw, s));
  }
  return total;
}

// ---------------------------------------------------------------------------

void PiecewiseProfile::validate() const {
  if (segments.empty()) throw std::invalid_argument("profile has no segments");
  if (!(period > 0.0)) throw std::invalid_argument("profile period must be > 0");
  CompensatedSum len;
  for (const auto& s : segments) {
    if (!(s.length > 0.0) || !std::isfinite(s.value)) {
      throw std::invalid_argument("segments need length > 0 and finite value");
    }
    len += s.length;
  }
  if (std::abs(len.value() - period) > 1e-12 * period) {
    throw std::invalid_argument("segment lengths sum to " + std::to_string(len.value()) +
                                ", period is " + std::to_string(period));
  }
  if (mean_zero && std::abs(mean_integral()) > 1e-12) {
    throw std::invalid_argument("profile flagged mean-zero but integrates to " +
                                std::to_string(mean_integral()));
  }
}

double PiecewiseProfile::mean_integral() const {
  CompensatedSum s;
  for (const auto& seg : segments) s += seg.length * seg.value;
  return s.value();
}

std::vector<double> PiecewiseProfile::breakpoints() const {
  std::vector<double> b{0.0};
  double acc = 0.0;
  for (const auto& seg : segments) {
    acc += seg.length;
    b.push_back(acc);
  }
  b.back() = period;
  return b;
}

double PiecewiseProfile::d0(double s) const {
  s -= period * std::floor(s / period);
  double start = 0.0;
  for (const auto& seg : segments) {
    if (s < start + seg.length) return seg.value;
    start += seg.length;
  }
  return segments.back().value;
}

double PiecewiseProfile::D(double s) const {
  const double cycles = std::floor(s / period);
  double rest = s - cycles * period;
  double acc = cycles * mean_integral();
  for (const auto& seg : segments) {
    const double take = std::min(rest, seg.length);
    if (take <= 0.0) break;
    acc += take * seg.value;
    rest -= take;
  }
  return acc;
}

GaussLegendre::GaussLegendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre needs n >= 1");
  nodes.resize(static_cast<std::size_t>(n));
  weights.resize(nodes.size());
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) nodes[static_cast<std::size_t>(n / 2)] = 0.0;
}

DiffractionMeasure measure_from_profile(const PiecewiseProfile& profile, int n_quad) {
  profile.validate();
  if (n_quad < 1) throw std::invalid_argument("n_quad must be >= 1");
  const GaussLegendre gl(n_quad);
  std::vector<Atom> atoms;
  double start = 0.0;
  double d_start = 0.0;
  double bound = 0.0;
  for (const auto& seg : profile.segments) {
    const double half = 0.5 * seg.length;
    for (int i = 0; i < n_quad; ++i) {
      const double t = half * (1.0 + gl.nodes[static_cast<std::size_t>(i)]);
      atoms.push_back({d_start + seg.value * t,
                       half * gl.weights[static_cast<std::size_t>(i)] / profile.period});
    }
    start += seg.length;
    d_start += seg.value * seg.length;
    bound = std::max(bound, std::abs(d_start));
  }
  DiffractionMeasure mu(std::move(atoms));
  mu.widen_support_bound(bound);
  return mu;
}

// ---------------------------------------------------------------------------

AssumptionReport check_assumptions(const NonlinearitySpec& spec,
                                   std::span<const double> grid,
                                   double small_amplitude_eps) {
  AssumptionReport rep;
  rep.homogeneity_min = std::numeric_limits<double>::infinity();
  rep.scaling_min = std::numeric_limits<double>::infinity();
  double a4 = std::numeric_limits<double>::infinity();
  bool any_small = false;
  for (double a : grid) {
    if (!(a > 0.0)) throw std::invalid_argument("assumption grid must be positive");
    const double v = spec.V(a);
    const double dv = spec.dV(a);
    rep.growth_constant = std::max(
        rep.growth_constant,
        std::abs(dv) / (std::pow(a, spec.gamma1 - 1.0) + std::pow(a, spec.gamma2 - 1.0)));
    const double h = dv * a - spec.gamma0 * v;
    // Relative slack for terms that cancel exactly in exact arithmetic.
    const double scale = std::abs(dv * a) + std::abs(spec.gamma0 * v);
    rep.homogeneity_min = std::min(rep.homogeneity_min, std::abs(h) <= 1e-13 * scale ? 0.0 : h);
    if (v > 0.0) rep.positive_somewhere = true;
    if (spec.kappa && a <= small_amplitude_eps) {
      any_small = true;
      a4 = std::min(a4, v / std::pow(a, *spec.kappa));
    }
    for (double t : {1.0, 1.25, 1.5, 2.0, 3.0, 5.0}) {
      const double vt = spec.V(t * a);
      const double d = vt - std::pow(t, spec.gamma0) * v;
      const double rel = d / (std::abs(vt) + 1.0);
      rep.scaling_min = std::min(rep.scaling_min, std::abs(rel) <= 1e-13 ? 0.0 : rel);
    }
  }
  rep.homogeneity_holds = rep.homogeneity_min >= 0.0;
  rep.scaling_holds = rep.scaling_min >= 0.0;
  if (any_small) rep.small_amplitude_constant = a4;
  return rep;
}

std::vector<double> amplitude_grid(double a_min, double a_max, int points) {
  if (!(a_min > 0.0) || !(a_max > a_min) || points < 2) {
    throw std::invalid_argument("amplitude_grid needs 0 < a_min < a_max and points >= 2");
  }
  std::vector<double> g(static_cast<std::size_t>(points));
  const double la = std::log(a_min), lb = std::log(a_max);
  for (int i = 0; i < points; ++i) {
    g[static_cast<std::size_t>(i)] = std::exp(la + (lb - la) * i / (points - 1));
  }
  return g;
}

}  // namespace dms

#include "dms/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "dms/diagnostics.hpp"
#include "dms/parallel.hpp"
#include "dms/random_field.hpp"

namespace dms {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct QState {
  LatticeField f;
  double q = 0.0;
  double kinetic = 0.0;
  LatticeField pq;
  double pq2 = 0.0;
  double slack = 0.0;
};

// N and its gradient come from a copy of the problem with d_av = 0, where
// H = −N and DH = −DN.
std::optional<QState> quotient_state(const EnergyFunctional& nl, LatticeField f, double lambda) {
  QState s;
  s.kinetic = dirichlet_energy(f);
  if (!(s.kinetic >= 1e-20)) return std::nullopt;
  const auto ev = nl.evaluate(f, true);
  const double n = ev.potential;
  s.q = n / s.kinetic;
  LatticeField lap(f.radius());
  dirichlet_laplacian(f.values(), lap.values());
  LatticeField gq(f.radius());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Complex gn = -ev.gradient.values()[i];
    const Complex gk = -2.0 * lap.values()[i];
    gq.values()[i] = (gn - s.q * gk) / s.kinetic;
  }
  const double w = inner(gq, f).real() / lambda;
  s.pq = gq;
  s.pq -= Complex(w) * f;
  s.pq2 = power_sum(s.pq, 2.0);
  s.slack = 16.0 * kEps * (std::abs(n) / s.kinetic + std::abs(s.q));
  s.f = std::move(f);
  return s;
}

void to_sphere(LatticeField& f, double lambda) {
  const double n = l2_norm(f);
  if (!(n > 0.0)) throw std::invalid_argument("zero field");
  f *= Complex(std::sqrt(lambda) / n);
}

QuotientResult ascend(const EnergyFunctional& nl, const SolveConfig& cfg, double lambda,
                      LatticeField f, std::string label) {
  QuotientResult res;
  res.start = std::move(label);
  to_sphere(f, lambda);
  auto st = quotient_state(nl, std::move(f), lambda);
  if (!st) {
    res.value = -std::numeric_limits<double>::infinity();
    return res;
  }
  double eta = cfg.step_init;
  res.history.push_back(st->q);
  while (res.iterations < cfg.max_iters) {
    const double scale = std::max(std::abs(st->q), 1e-300);
    if (std::sqrt(st->pq2 * lambda) / scale < cfg.grad_tol) {
      res.converged = true;
      break;
    }
    std::optional<QState> next;
    for (double step = eta; step > 1e-14 * cfg.step_init; step *= cfg.backtrack) {
      LatticeField trial = st->f;
      trial += Complex(step) * st->pq;
      to_sphere(trial, lambda);
      auto cand = quotient_state(nl, std::move(trial), lambda);
      if (!cand) continue;
      if (cand->q >= st->q + cfg.sufficient_decrease * step * st->pq2 - st->slack) {
        next = std::move(cand);
        eta = step;
        break;
      }
    }
    ++res.iterations;
    if (!next) break;
    LatticeField s = next->f;
    s -= st->f;
    LatticeField y = next->pq;
    y -= st->pq;
    const double sy = -inner(s, y).real();
    const double ss = power_sum(s, 2.0);
    eta = sy > 0.0 ? std::clamp(ss / sy, 1e-6, 1e6) : cfg.step_init;
    st = std::move(next);
    res.history.push_back(st->q);
    if (res.iterations % cfg.recenter_every == 0) {
      const long k = peak_site(st->f);
      if (k != 0) {
        LatticeField moved = shifted(st->f, -k);
        if (l2_norm(moved) > 0.0) {
          to_sphere(moved, lambda);
          auto cand = quotient_state(nl, std::move(moved), lambda);
          if (cand && cand->q >= st->q - st->slack) st = std::move(cand);
        }
      }
    }
  }
  res.value = st->q;
  res.field = std::move(st->f);
  return res;
}

// Sign runs stay on the fixed box: a negative energy there is a negative
// energy on the whole lattice, and sub-threshold runs would otherwise chase a
// spreading field.
SolveConfig sign_config(const SolveConfig& cfg) {
  SolveConfig c = cfg;
  c.auto_grow = false;
  c.max_iters = std::min(cfg.max_iters, 1000);
  return c;
}

}  // namespace

QuotientResult r_quotient_max(const Problem& problem, double lambda, const SolveConfig& cfg) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  cfg.validate();
  Problem pr = problem;
  pr.lambda = lambda;
  pr.d_av = 0.0;
  const int m = cfg.box.box_radius;
  const EnergyFunctional nl(pr, m);

  std::vector<std::pair<std::string, LatticeField>> starts;
  starts.emplace_back("single_site", delta(m, 0, 1.0));
  for (double nu : {1.5, 0.5, 0.15}) {
    LatticeField f(m);
    for (long x = -m; x <= m; ++x) f.at(x) = std::exp(-nu * std::abs(x));
    starts.emplace_back(fmt::format("exp_{}", nu), std::move(f));
  }
  for (int i = 0; i < cfg.restarts; ++i) {
    Rng rng(derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(i)));
    RandomFieldOptions opt;
    opt.envelope_rate = 0.3;
    starts.emplace_back("random_" + std::to_string(i), random_field(rng, m, opt));
  }
  {
    LatticeField f(m);
    for (long x = -m; x <= m; ++x) {
      f.at(x) = std::sin(std::numbers::pi * (x + m + 1) / (2.0 * m + 2.0));
    }
    starts.emplace_back("box_sine", std::move(f));
  }

  std::vector<QuotientResult> runs(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    runs[i] = ascend(nl, cfg, lambda, starts[i].second, starts[i].first);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].value > runs[best].value) best = i;
  }
  if (!std::isfinite(runs[best].value)) {
    throw NumericError("quotient ascent: every start was flat");
  }
  return std::move(runs[best]);
}

double energy_at(const Problem& problem, double lambda, const SolveConfig& cfg,
                 const LatticeField* seed_field, double seed_lambda) {
  Problem pr = problem;
  pr.lambda = lambda;
  double best = std::numeric_limits<double>::infinity();
  if (seed_field) {
    LatticeField f = *seed_field;
    f *= Complex(std::sqrt(lambda / seed_lambda));
    const double e = hamiltonian(pr, f);
    // A trial field below zero already certifies E_λ < 0.
    if (e < -1e-10) return e;
    best = minimize_from(pr, cfg, f, "seed").energy;
  }
  return std::min(best, minimize(pr, cfg).energy);
}

ThresholdEstimate lambda_cr_estimate(const Problem& tmpl, double d_av, double lo, double hi,
                                     const SolveConfig& cfg, double rel_width,
                                     bool quotient_cross_check) {
  if (!(d_av > 0.0)) throw std::invalid_argument("lambda_cr_estimate needs d_av > 0");
  if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("bracket must satisfy 0 < lo < hi");
  Problem pr = tmpl;
  pr.d_av = d_av;
  ThresholdEstimate est;

  const SolveConfig sign_cfg = sign_config(cfg);

  const auto seed = r_quotient_max(pr, hi, cfg);
  const auto above = [&](double lam) {
    const double e = energy_at(pr, lam, sign_cfg, &seed.field, hi);
    est.trace.push_back({lam, e, e < -1e-10});
    return e < -1e-10;
  };
  if (above(lo) || !above(hi)) {
    throw NumericError(fmt::format("E_lambda has no sign change on [{}, {}]", lo, hi));
  }
  double a = lo, b = hi;
  while ((b - a) > rel_width * b) {
    const double mid = 0.5 * (a + b);
    (above(mid) ? b : a) = mid;
  }
  est.lambda_lo = a;
  est.lambda_hi = b;
  est.lambda_cr = 0.5 * (a + b);

  if (quotient_cross_check) {
    const auto excess = [&](double lam) {
      const double v = r_quotient_max(pr, lam, cfg).value - 0.5 * d_av;
      est.quotient_trace.push_back({lam, v, v > 0.0});
      return v;
    };
    if (excess(lo) <= 0.0 && excess(hi) > 0.0) {
      double qa = lo, qb = hi;
      while ((qb - qa) > rel_width * qb) {
        const double mid = 0.5 * (qa + qb);
        (excess(mid) > 0.0 ? qb : qa) = mid;
      }
      est.lambda_cr_quotient = 0.5 * (qa + qb);
    }
  }
  return est;
}

ScalingReport scaling_checks(const std::vector<double>& lambdas, const std::vector<double>& r_hat,
                             double gamma0, double tol, std::optional<double> d_av,
                             std::optional<double> lambda_cr) {
  if (lambdas.size() != r_hat.size()) throw std::invalid_argument("size mismatch");
  ScalingReport rep;
  const double expo = 0.5 * (gamma0 - 2.0);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
      if (!(lambdas[i] <= lambdas[j]) || i == j || !(r_hat[i] > 0.0)) continue;
      ScalingPair p;
      p.lambda1 = lambdas[i];
      p.lambda2 = lambdas[j];
      p.ratio = r_hat[j] / (std::pow(lambdas[j] / lambdas[i], expo) * r_hat[i]);
      p.pass = p.ratio >= 1.0 - tol;
      rep.all_pass = rep.all_pass && p.pass;
      rep.pairs.push_back(p);
    }
  }
  if (d_av && lambda_cr) {
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      if (!(r_hat[i] > 0.0)) continue;
      SandwichCheck c;
      c.lambda0 = lambdas[i];
      const double q = *d_av / (2.0 * r_hat[i]);
      c.lower = lambdas[i] * std::pow(std::min(q, 1.0), 1.0 / expo);
      c.upper = lambdas[i] * std::pow(std::max(q, 1.0), 1.0 / expo);
      c.lower_pass = c.lower <= *lambda_cr * (1.0 + tol);
      c.upper_pass = *lambda_cr <= c.upper * (1.0 + tol);
      rep.all_pass = rep.all_pass && c.lower_pass && c.upper_pass;
      rep.sandwich.push_back(c);
    }
  }
  return rep;
}

ThresholdReport threshold_report(const Problem& problem, const std::vector<double>& lambdas,
                                 const SolveConfig& cfg,
                                 std::optional<std::pair<double, double>> bracket) {
  ThresholdReport rep;
  rep.lambdas = lambdas;
  rep.r_hat.resize(lambdas.size());
  rep.energies.resize(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) {
    rep.r_hat[i] = r_quotient_max(problem, lambdas[i], cfg).value;
    rep.energies[i] = energy_at(problem, lambdas[i], sign_config(cfg), nullptr, 1.0);
  });
  const auto& nl = problem.nonlinearity;
  const double gamma0 = nl.gamma0;
  if (nl.is_power_sum() && nl.terms.size() == 1) {
    const double expo = 0.5 * (nl.terms[0].exponent - 2.0);
    double s = 0.0;
    for (std::size_t i = 0; i < lambdas.size(); ++i) s += rep.r_hat[i] / std::pow(lambdas[i], expo);
    rep.r0_hat = s / static_cast<double>(lambdas.size());
  }
  std::optional<double> cr;
  if (bracket && problem.d_av > 0.0) {
    rep.estimate = lambda_cr_estimate(problem, problem.d_av, bracket->first, bracket->second, cfg);
    cr = rep.estimate->lambda_cr;
  }
  rep.scaling = scaling_checks(lambdas, rep.r_hat, gamma0, 1e-3,
                               cr ? std::optional<double>(problem.d_av) : std::nullopt, cr);
  return rep;
}

void write_threshold_csv(std::ostream& out, const ThresholdReport& r) {
  out << "lambda,R_hat,E_lambda\n";
  for (std::size_t i = 0; i < r.lambdas.size(); ++i) {
    fmt::print(out, "{:.17g},{:.17g},{:.17g}\n", r.lambdas[i], r.r_hat[i], r.energies[i]);
  }
}

nlohmann::json to_json(const ThresholdReport& r) {
  nlohmann::json j;
  j["lambda_grid"] = r.lambdas;
  j["R_hat"] = r.r_hat;
  j["E_lambda"] = r.energies;
  j["R0_hat"] = r.r0_hat ? nlohmann::json(*r.r0_hat) : nlohmann::json(nullptr);
  if (r.estimate) {
    const auto& e = *r.estimate;
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& s : e.trace) trace.push_back({{"lambda", s.lambda}, {"E", s.value}, {"above", s.above}});
    j["lambda_cr_hat"] = e.lambda_cr;
    j["bracket"] = {e.lambda_lo, e.lambda_hi};
    j["bisection"] = trace;
    j["lambda_cr_quotient"] =
        e.lambda_cr_quotient ? nlohmann::json(*e.lambda_cr_quotient) : nlohmann::json(nullptr);
  } else {
    j["lambda_cr_hat"] = nullptr;
  }
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.scaling.pairs) {
    pairs.push_back({{"lambda1", p.lambda1}, {"lambda2", p.lambda2}, {"ratio", p.ratio}, {"pass", p.pass}});
  }
  j["scaling_pairs"] = pairs;
  nlohmann::json sw = nlohmann::json::array();
  for (const auto& c : r.scaling.sandwich) {
    sw.push_back({{"lambda0", c.lambda0}, {"lower", c.lower}, {"upper", c.upper},
                  {"lower_pass", c.lower_pass}, {"upper_pass", c.upper_pass}});
  }
  j["lambda_cr_bounds"] = sw;
  j["checks_passed"] = r.scaling.all_pass;
  return j;
}

}  // namespace dms

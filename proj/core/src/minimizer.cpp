#include "dms/minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dms/diagnostics.hpp"
#include "dms/parallel.hpp"
#include "dms/random_field.hpp"

namespace dms {

void SolveConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  if (!(grad_tol > 0.0)) throw std::invalid_argument("grad_tol must be positive");
  if (!(step_init > 0.0)) throw std::invalid_argument("step_init must be positive");
  if (!(backtrack > 0.0 && backtrack < 1.0)) {
    throw std::invalid_argument("backtrack factor must lie in (0, 1)");
  }
  if (!(sufficient_decrease > 0.0 && sufficient_decrease < 1.0)) {
    throw std::invalid_argument("sufficient_decrease must lie in (0, 1)");
  }
  if (recenter_every < 1) throw std::invalid_argument("recenter_every must be positive");
  if (restarts < 0) throw std::invalid_argument("restarts must be >= 0");
  box.validate();
  if (max_box_radius < box.box_radius) {
    throw std::invalid_argument("max_box_radius below box_radius");
  }
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::not_converged: return "not_converged";
    case SolveStatus::no_negative_energy: return "no_negative_energy";
  }
  return "?";
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void project_to_sphere(LatticeField& f, double lambda) {
  const double n = l2_norm(f);
  if (!(n > 0.0)) throw std::invalid_argument("initial field is zero");
  f *= Complex(std::sqrt(lambda) / n);
}

double edge_amplitude(const LatticeField& f) {
  return std::max(std::abs(f[-f.radius()]), std::abs(f[f.radius()]));
}

struct State {
  LatticeField f;
  EnergyFunctional::Evaluation ev;
  LatticeField pg;
  double omega = 0.0;
  double pg_norm = 0.0;  // ‖pg‖ / ‖f‖
  double slack = 0.0;    // rounding allowance on energy comparisons
};

State make_state(const EnergyFunctional& E, LatticeField f, double lambda) {
  State s;
  s.ev = E.evaluate(f, true);
  s.omega = inner(s.ev.gradient, f).real() / lambda;
  s.pg = s.ev.gradient;
  s.pg -= Complex(s.omega) * f;
  s.pg_norm = l2_norm(s.pg) / std::sqrt(lambda);
  s.slack = 16.0 * kEps * (std::abs(s.ev.kinetic) + std::abs(s.ev.potential));
  s.f = std::move(f);
  return s;
}

// Descent on a fixed box. Returns true on convergence.
bool descend(const EnergyFunctional& E, const SolveConfig& cfg, double lambda, State& st,
             int& iterations, std::vector<IterationRecord>& history) {
  double eta = cfg.step_init;
  while (iterations < cfg.max_iters) {
    history.push_back({st.ev.energy, st.pg_norm});
    if (st.pg_norm < cfg.grad_tol) return true;

    const double pg2 = power_sum(st.pg, 2.0);
    std::optional<State> next;
    for (double step = eta; step > 1e-14 * cfg.step_init; step *= cfg.backtrack) {
      LatticeField trial = st.f;
      trial -= Complex(step) * st.pg;
      project_to_sphere(trial, lambda);
      State cand = make_state(E, std::move(trial), lambda);
      const double bar = st.ev.energy - cfg.sufficient_decrease * step * pg2 + st.slack;
      if (cand.ev.energy <= bar) {
        next = std::move(cand);
        eta = step;
        break;
      }
    }
    ++iterations;
    if (!next) return false;

    // Barzilai–Borwein proposal for the next trial step.
    LatticeField s = next->f;
    s -= st.f;
    LatticeField y = next->pg;
    y -= st.pg;
    const double sy = inner(s, y).real();
    const double ss = power_sum(s, 2.0);
    eta = sy > 0.0 ? std::clamp(ss / sy, 1e-6, 1e4) : cfg.step_init;
    st = std::move(*next);

    if (iterations % cfg.recenter_every == 0) {
      const long k = peak_site(st.f);
      if (k != 0) {
        LatticeField moved = shifted(st.f, -k);
        if (l2_norm(moved) > 0.0) {
          project_to_sphere(moved, lambda);
          State cand = make_state(E, std::move(moved), lambda);
          if (cand.ev.energy <= st.ev.energy + st.slack) st = std::move(cand);
        }
      }
    }
  }
  history.push_back({st.ev.energy, st.pg_norm});
  return st.pg_norm < cfg.grad_tol;
}

int box_for_rate(double rate, double amplitude, const SolveConfig& cfg) {
  const double need = std::log(std::max(amplitude, 1e-300) / cfg.box.tail_floor) / rate;
  const double capped = std::min<double>(cfg.max_box_radius, std::ceil(need));
  return std::max(cfg.box.box_radius, static_cast<int>(capped));
}

LatticeField exp_start(double rate, double lambda, int radius) {
  LatticeField f(radius);
  for (long x = -radius; x <= radius; ++x) f.at(x) = std::exp(-rate * std::abs(x));
  project_to_sphere(f, lambda);
  return f;
}

}  // namespace

std::vector<std::pair<std::string, LatticeField>> initial_fields(const Problem& problem,
                                                                 const SolveConfig& cfg) {
  problem.validate();
  cfg.validate();
  const double lambda = problem.lambda;
  const int m0 = cfg.box.box_radius;
  std::vector<std::pair<std::string, LatticeField>> out;
  out.emplace_back("single_site", delta(m0, 0, std::sqrt(lambda)));

  if (problem.d_av > 0.0) {
    const double w = lagrange_multiplier(problem, out.front().second);
    if (w < 0.0) {
      const double nu = std::acosh(std::abs(w) / (2.0 * problem.d_av) + 1.0);
      const int m = box_for_rate(nu, std::sqrt(lambda), cfg);
      out.emplace_back("exp_heuristic", exp_start(nu, lambda, m));
    }
    // Best member of the exponential family on a log grid of rates.
    double best_e = std::numeric_limits<double>::infinity();
    double best_nu = 0.0;
    int since_best = 0;
    for (double nu = 4.0; nu >= 1e-3; nu *= 0.7) {
      const int m = box_for_rate(nu, std::sqrt(lambda), cfg);
      const auto f = exp_start(nu, lambda, m);
      const double e = EnergyFunctional(problem, m).hamiltonian(f);
      if (e < best_e) {
        best_e = e;
        best_nu = nu;
        since_best = 0;
      } else if (++since_best >= 4) {
        break;
      }
    }
    if (best_e < 0.0) {
      const int m = box_for_rate(best_nu, std::sqrt(lambda), cfg);
      out.emplace_back("exp_scan", exp_start(best_nu, lambda, m));
    }
  }

  for (int i = 0; i < cfg.restarts; ++i) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    RandomFieldOptions opt;
    opt.envelope_rate = 0.5;
    opt.dropout = 0.0;
    auto f = random_field(rng, m0, opt);
    project_to_sphere(f, lambda);
    out.emplace_back("random_" + std::to_string(i), std::move(f));
  }
  return out;
}

SolveResult minimize_from(const Problem& problem, const SolveConfig& cfg, LatticeField initial,
                          std::string label) {
  problem.validate();
  cfg.validate();
  const double lambda = problem.lambda;
  project_to_sphere(initial, lambda);

  SolveResult res;
  res.lambda = lambda;
  res.start = std::move(label);
  int iterations = 0;
  bool converged = false;
  LatticeField f = std::move(initial);
  for (;;) {
    const EnergyFunctional E(problem, f.radius());
    State st = make_state(E, std::move(f), lambda);
    converged = descend(E, cfg, lambda, st, iterations, res.history);
    f = std::move(st.f);
    res.energy = st.ev.energy;
    res.kinetic = st.ev.kinetic;
    res.potential = st.ev.potential;
    res.omega = st.omega;
    res.residual = st.pg_norm;
    const bool pinned = edge_amplitude(f) > cfg.box.tail_floor;
    if (!pinned || !cfg.auto_grow || f.radius() >= cfg.max_box_radius ||
        iterations >= cfg.max_iters) {
      if (pinned && cfg.auto_grow) {
        warn("solver field reaches the box edge (radius " + std::to_string(f.radius()) + ")");
      }
      break;
    }
    const int grown = std::min(cfg.max_box_radius, f.radius() + f.radius() / 2 + 8);
    f = f.resized(grown);
  }
  res.field = std::move(f);
  res.iterations = iterations;
  res.converged = converged;
  if (res.energy > -1e-10) {
    res.status = SolveStatus::no_negative_energy;
  } else {
    res.status = converged ? SolveStatus::converged : SolveStatus::not_converged;
  }
  return res;
}

SolveResult minimize(const Problem& problem, const SolveConfig& cfg) {
  auto starts = initial_fields(problem, cfg);
  std::vector<SolveResult> runs(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    runs[i] = minimize_from(problem, cfg, starts[i].second, starts[i].first);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    const double tie = 1e-12 * std::max(1.0, std::abs(runs[best].energy));
    const bool lower = runs[i].energy < runs[best].energy - tie;
    const bool same = std::abs(runs[i].energy - runs[best].energy) <= tie;
    if (lower || (same && runs[i].converged && !runs[best].converged)) best = i;
  }
  SolveResult out = std::move(runs[best]);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = i == best ? out : runs[i];
    out.starts.push_back({r.start, r.energy, r.iterations, r.converged});
  }
  return out;
}

// ---------------------------------------------------------------------------

EnergyCurve energy_curve(const Problem& tmpl, const std::vector<double>& lambdas,
                         const SolveConfig& cfg) {
  if (lambdas.empty()) throw std::invalid_argument("empty lambda grid");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0) || (i > 0 && !(lambdas[i] > lambdas[i - 1]))) {
      throw std::invalid_argument("lambda grid must be positive and increasing");
    }
  }
  EnergyCurve curve;
  curve.points.resize(lambdas.size());
  curve.results.resize(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) {
    Problem pr = tmpl;
    pr.lambda = lambdas[i];
    auto& pt = curve.points[i];
    pt.lambda = lambdas[i];
    try {
      auto r = minimize(pr, cfg);
      pt.energy = r.energy;
      pt.omega = r.omega;
      pt.residual = r.residual;
      pt.status = r.status;
      curve.results[i] = std::move(r);
    } catch (const std::exception& e) {
      pt.error = e.what();
      pt.energy = std::numeric_limits<double>::quiet_NaN();
    }
  });

  const auto& pts = curve.points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!pts[i].error.empty()) continue;
    if (pts[i].energy > 1e-10) curve.positive_energy.push_back(i);
    if (i + 1 < pts.size() && pts[i + 1].error.empty()) {
      const double tol = 1e-9 * (1.0 + std::abs(pts[i].energy));
      if (pts[i + 1].energy > pts[i].energy + tol) curve.monotone_breaks.push_back(i);
    }
  }
  const auto find = [&](double lam) -> std::optional<std::size_t> {
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (std::abs(pts[k].lambda - lam) <= 1e-12 * lam && pts[k].error.empty()) return k;
    }
    return std::nullopt;
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i; j < pts.size(); ++j) {
      if (!pts[i].error.empty() || !pts[j].error.empty()) continue;
      const auto k = find(pts[i].lambda + pts[j].lambda);
      if (!k) continue;
      SubadditivityPair p{pts[i].lambda, pts[j].lambda,
                          pts[i].energy + pts[j].energy - pts[*k].energy};
      curve.pairs.push_back(p);
      if (pts[i].energy < -1e-8 && pts[j].energy < -1e-8 && !(p.gap > 0.0)) {
        curve.strict_failures.push_back(p);
      }
    }
  }
  return curve;
}

nlohmann::json to_json(const SolveResult& r, const Problem& problem,
                       const std::string& field_ref) {
  nlohmann::json starts = nlohmann::json::array();
  for (const auto& s : r.starts) {
    starts.push_back({{"label", s.label}, {"E", s.energy}, {"iterations", s.iterations},
                      {"converged", s.converged}});
  }
  return {{"lambda", r.lambda},
          {"d_av", problem.d_av},
          {"E", r.energy},
          {"kinetic", r.kinetic},
          {"N", r.potential},
          {"omega", r.omega},
          {"residual", r.residual},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"status", to_string(r.status)},
          {"start", r.start},
          {"box_radius", r.field.radius()},
          {"field", field_ref},
          {"starts", starts}};
}

nlohmann::json to_json(const EnergyCurve& c) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : c.points) {
    nlohmann::json j = {{"lambda", p.lambda}, {"E", p.energy}, {"omega", p.omega},
                        {"residual", p.residual}, {"status", to_string(p.status)}};
    if (!p.error.empty()) j["error"] = p.error;
    pts.push_back(std::move(j));
  }
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : c.pairs) {
    pairs.push_back({{"lambda1", p.lambda1}, {"lambda2", p.lambda2}, {"gap", p.gap}});
  }
  return {{"points", pts},
          {"positive_energy", c.positive_energy},
          {"monotone_breaks", c.monotone_breaks},
          {"subadditivity_pairs", pairs},
          {"strict_subadditivity_failures", c.strict_failures.size()}};
}

}  // namespace dms

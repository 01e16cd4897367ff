#include "dms/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "dms/diagnostics.hpp"
#include "dms/evolution.hpp"
#include "dms/parallel.hpp"

namespace dms {

const char* to_string(PropagationScheme s) {
  switch (s) {
    case PropagationScheme::strang: return "strang";
    case PropagationScheme::rk4: return "rk4";
  }
  return "?";
}

PropagationScheme parse_propagation_scheme(std::string_view name) {
  if (name == "strang") return PropagationScheme::strang;
  if (name == "rk4") return PropagationScheme::rk4;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "' (strang, rk4)");
}

void PropagationConfig::validate() const {
  if (!(dt > 0.0) || !(dt < 0.1)) throw std::invalid_argument("dt must lie in (0, 0.1)");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be >= 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
  if (snapshot_every < 0) throw std::invalid_argument("snapshot_every must be >= 0");
  if (fast_steps < 1) throw std::invalid_argument("fast_steps must be >= 1");
}

namespace {

constexpr double kStepDriftLimit = 1e-6;

void axpy(LatticeField& y, Complex a, const LatticeField& x) {
  auto ys = y.values();
  auto xs = x.values();
  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] += a * xs[i];
}

LatticeField rk4_step(const LatticeField& v, double h,
                      const auto& rhs) {
  const LatticeField k1 = rhs(v);
  LatticeField w = v;
  axpy(w, 0.5 * h, k1);
  const LatticeField k2 = rhs(w);
  w = v;
  axpy(w, 0.5 * h, k2);
  const LatticeField k3 = rhs(w);
  w = v;
  axpy(w, h, k3);
  const LatticeField k4 = rhs(w);
  LatticeField out = v;
  axpy(out, h / 6.0, k1);
  axpy(out, h / 3.0, k2);
  axpy(out, h / 3.0, k3);
  axpy(out, h / 6.0, k4);
  return out;
}

// u ← e^{i c p(|u|) h} u site by site
void local_phase_flow(const NonlinearitySpec& v, double c, double h, LatticeField& u) {
  for (Complex& z : u.values()) {
    if (z == Complex{}) continue;
    z *= std::polar(1.0, c * v.p(std::abs(z)) * h);
  }
}

void check_drift(const char* who, double before, double after) {
  if (before == 0.0) return;
  const double drift = std::abs(after - before) / before;
  if (drift > kStepDriftLimit) {
    throw NumericError(fmt::format("{}: norm drift {:.3g} in one step, reduce dt", who, drift));
  }
}

double amplitude_distance(const LatticeField& a, const LatticeField& b) {
  const int m = std::max(a.radius(), b.radius());
  double s = 0.0;
  for (long x = -m; x <= m; ++x) {
    const double d = std::abs(a[x]) - std::abs(b[x]);
    s += d * d;
  }
  return std::sqrt(s);
}

long step_count(double t_end, double dt) {
  if (t_end == 0.0) return 0;
  return std::max<long>(1, static_cast<long>(std::ceil(t_end / dt - 1e-9)));
}

// Start of the next piece of d₀(·/ε) strictly after the fast time s.
double next_breakpoint(const PiecewiseProfile& prof, const std::vector<double>& br, double s) {
  const double cycle = std::floor(s / prof.period);
  const double tol = 1e-12 * std::max(1.0, std::abs(s));
  for (double b : br) {
    const double c = cycle * prof.period + b;
    if (c > s + tol) return c;
  }
  return (cycle + 1.0) * prof.period + br[1];
}

double max_abs_d(const PiecewiseProfile& prof) {
  double m = 0.0;
  for (double b : prof.breakpoints()) m = std::max(m, std::abs(prof.D(b)));
  return m;
}

void require_mean_zero(const PiecewiseProfile& prof) {
  prof.validate();
  if (std::abs(prof.mean_integral()) > 1e-12 * prof.period) {
    throw std::invalid_argument("full flow needs a mean-zero d0, integral is " +
                                std::to_string(prof.mean_integral()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------

AveragedFlow::AveragedFlow(EnergyFunctional energy) : energy_(std::move(energy)) {
  const auto atoms = energy_.problem().measure.atoms();
  if (atoms.size() == 1 && atoms[0].node == 0.0) {
    local_ = true;
    local_weight_ = atoms[0].weight;
  }
}

LatticeField AveragedFlow::velocity(const LatticeField& v) const {
  const double d = energy_.problem().d_av;
  LatticeField g = energy_.potential_gradient(v);
  std::vector<Complex> lap(v.size());
  dirichlet_laplacian(v.values(), lap);
  auto gs = g.values();
  const Complex i{0.0, 1.0};
  for (std::size_t k = 0; k < gs.size(); ++k) gs[k] = i * (d * lap[k] + gs[k]);
  return g;
}

LatticeField AveragedFlow::step(const LatticeField& v, double dt,
                                PropagationScheme scheme) const {
  if (v.radius() != energy_.radius()) {
    throw std::invalid_argument("AveragedFlow: field radius does not match the box");
  }
  const double before = power_sum(v, 2.0);
  LatticeField out;
  if (scheme == PropagationScheme::rk4) {
    out = rk4_step(v, dt, [this](const LatticeField& w) { return velocity(w); });
  } else {
    const double d = energy_.problem().d_av;
    out = v;
    taylor_evolve_in_place(0.5 * d * dt, out.values());
    if (local_) {
      local_phase_flow(energy_.problem().nonlinearity, local_weight_, dt, out);
    } else {
      const Complex i{0.0, 1.0};
      out = rk4_step(out, dt, [this, i](const LatticeField& w) {
        LatticeField g = energy_.potential_gradient(w);
        g *= i;
        return g;
      });
    }
    taylor_evolve_in_place(0.5 * d * dt, out.values());
  }
  check_drift("step_averaged", before, power_sum(out, 2.0));
  return out;
}

LatticeField step_averaged(const Problem& problem, const LatticeField& v, double dt,
                           PropagationScheme scheme) {
  return AveragedFlow(EnergyFunctional(problem, v.radius())).step(v, dt, scheme);
}

LatticeField step_full(const Problem& problem, const LatticeField& u, double t, double dt,
                       const PropagationConfig& config) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_full needs dt > 0");
  const PiecewiseProfile& prof = config.profile;
  const double eps = config.epsilon;
  const auto br = prof.breakpoints();
  const double before = power_sum(u, 2.0);
  LatticeField out = u;
  const double end = t + dt;
  double a = t;
  while (a < end) {
    double b = std::min(end, eps * next_breakpoint(prof, br, a / eps));
    if (end - b < 1e-12 * dt) b = end;
    const double h = b - a;
    // d is constant on (a, b)
    const double d = prof.d0(0.5 * (a + b) / eps) / eps + problem.d_av;
    taylor_evolve_in_place(0.5 * d * h, out.values());
    local_phase_flow(problem.nonlinearity, 1.0, h, out);
    taylor_evolve_in_place(0.5 * d * h, out.values());
    a = b;
  }
  check_drift("step_full", before, power_sum(out, 2.0));
  return out;
}

// ---------------------------------------------------------------------------

Trajectory propagate_averaged(const Problem& problem, const LatticeField& phi,
                              const PropagationConfig& config) {
  config.validate();
  problem.validate();
  const AveragedFlow flow(EnergyFunctional(problem, phi.radius()));
  const double n0 = power_sum(phi, 2.0);
  const double norm_phi = std::sqrt(n0);
  if (n0 == 0.0) throw std::invalid_argument("propagate_averaged: zero initial field");
  const long n = step_count(config.t_end, config.dt);
  const double h = n > 0 ? config.t_end / n : 0.0;

  Trajectory tr;
  const double h0 = flow.energy().hamiltonian(phi);
  auto record = [&](long k, const LatticeField& v, double dev) {
    const double H = flow.energy().hamiltonian(v);
    tr.points.push_back({k * h, l2_norm(v), H, dev});
    tr.max_energy_drift =
        std::max(tr.max_energy_drift, std::abs(H - h0) / std::max(std::abs(h0), 1e-300));
  };
  LatticeField v = phi;
  record(0, v, 0.0);
  if (config.snapshot_every > 0) tr.snapshots.push_back({0, 0.0, v});
  for (long k = 1; k <= n; ++k) {
    v = flow.step(v, h, config.scheme);
    const double dev = amplitude_distance(v, phi) / norm_phi;
    tr.max_deviation = std::max(tr.max_deviation, dev);
    tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(power_sum(v, 2.0) - n0) / n0);
    if (k % config.record_every == 0 || k == n) record(k, v, dev);
    if (config.snapshot_every > 0 && k % config.snapshot_every == 0) {
      tr.snapshots.push_back({k, k * h, v});
    }
  }
  tr.steps = n;
  return tr;
}

Trajectory propagate_full(const Problem& problem, const LatticeField& phi,
                          const PropagationConfig& config) {
  config.validate();
  problem.validate();
  require_mean_zero(config.profile);
  const PiecewiseProfile& prof = config.profile;
  const double eps = config.epsilon;
  // room for the fast spreading by T_D
  const int pad = required_margin(max_abs_d(prof), 1e-13);
  const LatticeField u0 = phi.resized(phi.radius() + pad);
  const EnergyFunctional energy(problem, u0.radius());
  const double n0 = power_sum(u0, 2.0);
  if (n0 == 0.0) throw std::invalid_argument("propagate_full: zero initial field");
  const double norm_phi = std::sqrt(n0);

  const double dt = std::min(config.dt, eps * prof.period / config.fast_steps);
  const long n = step_count(config.t_end, dt);
  const double h = n > 0 ? config.t_end / n : 0.0;

  Trajectory tr;
  double h0 = 0.0;
  // T_{D(t/ε)} φ, advanced alongside u
  LatticeField ref = u0;
  auto record = [&](long k, const LatticeField& u, double dev) {
    const double t = k * h;
    LatticeField v = u;
    taylor_evolve_in_place(-prof.D(t / eps), v.values());
    const double H = energy.hamiltonian(v);
    if (k == 0) h0 = H;
    tr.points.push_back({t, l2_norm(u), H, dev});
    tr.max_energy_drift =
        std::max(tr.max_energy_drift, std::abs(H - h0) / std::max(std::abs(h0), 1e-300));
  };
  LatticeField u = u0;
  record(0, u, 0.0);
  if (config.snapshot_every > 0) tr.snapshots.push_back({0, 0.0, u});
  for (long k = 1; k <= n; ++k) {
    u = step_full(problem, u, (k - 1) * h, h, config);
    const double t = k * h;
    taylor_evolve_in_place(prof.D(t / eps) - prof.D((t - h) / eps), ref.values());
    const double dev = amplitude_distance(u, ref) / norm_phi;
    tr.max_deviation = std::max(tr.max_deviation, dev);
    tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(power_sum(u, 2.0) - n0) / n0);
    if (k % config.record_every == 0 || k == n) record(k, u, dev);
    if (config.snapshot_every > 0 && k % config.snapshot_every == 0) {
      tr.snapshots.push_back({k, t, u});
    }
  }
  tr.steps = n;
  return tr;
}

BreatherReport breather_experiment(const Problem& problem, const LatticeField& phi,
                                   double omega, const PropagationConfig& config,
                                   std::vector<double> epsilons) {
  if (!(omega != 0.0) || !std::isfinite(omega)) {
    throw std::invalid_argument("breather_experiment needs a nonzero multiplier");
  }
  if (epsilons.empty()) throw std::invalid_argument("breather_experiment needs epsilons");
  for (double e : epsilons) {
    if (!(e > 0.0)) throw std::invalid_argument("epsilons must be > 0");
  }
  std::sort(epsilons.begin(), epsilons.end(), std::greater<>());
  BreatherReport rep;
  rep.omega = omega;
  rep.slow_period = 2.0 * std::numbers::pi / std::abs(omega);

  PropagationConfig avg = config;
  avg.t_end = rep.slow_period;
  rep.averaged_deviation = propagate_averaged(problem, phi, avg).max_deviation;

  rep.runs.resize(epsilons.size());
  parallel_for(epsilons.size(), [&](std::size_t i) {
    BreatherRun& run = rep.runs[i];
    run.epsilon = epsilons[i];
    PropagationConfig c = config;
    c.epsilon = epsilons[i];
    c.t_end = rep.slow_period;
    c.snapshot_every = 0;
    c.record_every = std::numeric_limits<int>::max();
    try {
      const Trajectory tr = propagate_full(problem, phi, c);
      run.deviation = tr.max_deviation;
      run.steps = tr.steps;
      run.norm_drift = tr.max_norm_drift;
    } catch (const NumericError& e) {
      run.error = e.what();
    }
  });
  rep.strictly_decreasing = true;
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    if (!rep.runs[i].error.empty()) rep.strictly_decreasing = false;
    if (i > 0 && !(rep.runs[i].deviation < rep.runs[i - 1].deviation)) {
      rep.strictly_decreasing = false;
    }
  }
  return rep;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& tr) {
  out << "t,norm,energy,deviation\n";
  for (const auto& p : tr.points) {
    fmt::print(out, "{:.17g},{:.17g},{:.17g},{:.17g}\n", p.t, p.norm, p.energy, p.deviation);
  }
}

nlohmann::json to_json(const BreatherReport& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& run : r.runs) {
    runs.push_back({{"epsilon", run.epsilon},
                    {"deviation", run.deviation},
                    {"steps", run.steps},
                    {"norm_drift", run.norm_drift},
                    {"error", run.error}});
  }
  return {{"omega", r.omega},
          {"slow_period", r.slow_period},
          {"averaged_deviation", r.averaged_deviation},
          {"runs", runs},
          {"strictly_decreasing", r.strictly_decreasing}};
}

}  // namespace dms
